"""8-bit grayscale PNG I/O for generated samples."""

import numpy as np
from PIL import Image


def write_png(image, side, path):
    """Clamp a flat float image to [0,1] and write it as 8-bit grayscale."""
    img = np.asarray(image, dtype=np.float64).reshape(side, side)
    quantized = np.rint(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(quantized, mode="L").save(path, format="PNG")


def read_png(path):
    """Flat float image in [0,1] from an 8-bit grayscale PNG."""
    with Image.open(path) as im:
        arr = np.asarray(im.convert("L"), dtype=np.float64)
    return (arr / 255.0).ravel()
