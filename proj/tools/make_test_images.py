"""Write 256x256 8-bit PGM test images from the scikit-image sample set."""
import pathlib
import sys

import numpy as np
from skimage import color, data, transform

NAMES = ["camera", "moon", "coins", "astronaut", "coffee", "chelsea", "rocket", "page"]


def to_gray256(img):
    if img.ndim == 3:
        img = color.rgb2gray(img[..., :3])
    else:
        img = img.astype(np.float64) / 255.0
    h, w = img.shape
    side = min(h, w)
    top, left = (h - side) // 2, (w - side) // 2
    img = img[top:top + side, left:left + side]
    img = transform.resize(img, (256, 256), anti_aliasing=True)
    return np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)


def main(out_dir):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name in NAMES:
        pixels = to_gray256(getattr(data, name)())
        with open(out / f"{name}.pgm", "wb") as f:
            f.write(b"P5\n256 256\n255\n")
            f.write(pixels.tobytes())
        print(out / f"{name}.pgm")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/images")
