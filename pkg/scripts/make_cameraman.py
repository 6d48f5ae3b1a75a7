"""Regenerate the bundled 256x256 Cameraman PGM from scikit-image's copy.

scikit-image ships the 512x512 scan; 2x2 block averaging gives the usual
256x256 test image.  Run once; the output is committed under the package.
"""
from pathlib import Path

import numpy as np
from skimage import data

from midal.imageio import write_image

OUT = Path(__file__).resolve().parents[1] / "src" / "midal" / "data" / "cameraman256.pgm"

cam = data.camera().astype(np.float64)
small = cam.reshape(256, 2, 256, 2).mean(axis=(1, 3))
write_image(small, OUT, "pgm8", display_range=(0.0, 255.0))
print(f"wrote {OUT}")
