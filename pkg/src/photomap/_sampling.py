import numpy as np

EDGE_EPS = 1e-9


def bilinear(img, x, y, fill=0.0, clamp=False):
    """Sample a 2-D raster at fractional (column, row) positions.

    Points outside ``[0, W-1] x [0, H-1]`` get ``fill`` unless ``clamp`` is set,
    in which case coordinates are clipped to the border first.  Integer
    coordinates reproduce the stored samples exactly.
    """
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if clamp:
        x = np.clip(x, 0.0, w - 1)
        y = np.clip(y, 0.0, h - 1)
        inside = np.ones(np.broadcast(x, y).shape, dtype=bool)
    else:
        # rounding (e.g. sin(pi) != 0) must not push border samples outside
        inside = (x >= -EDGE_EPS) & (x <= w - 1 + EDGE_EPS) & (y >= -EDGE_EPS) & (y <= h - 1 + EDGE_EPS)
        x = np.where(inside, np.clip(x, 0.0, w - 1), 0.0)
        y = np.where(inside, np.clip(y, 0.0, h - 1), 0.0)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    fx = x - x0
    fy = y - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    out = (img[y0, x0] * (1 - fx) * (1 - fy)
           + img[y0, x1] * fx * (1 - fy)
           + img[y1, x0] * (1 - fx) * fy
           + img[y1, x1] * fx * fy)
    if not clamp:
        out = np.where(inside, out, fill)
    return out, inside
