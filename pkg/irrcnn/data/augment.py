"""
Random horizontal flipping, the only augmentation used.
"""
import numpy as np

from irrcnn.data.dataset import LabeledImage

FLIP_PROBABILITY = 0.5


def hflip(img: LabeledImage) -> LabeledImage:
    """Reverse column order in every channel; labels are kept."""
    return LabeledImage(
        pixels=np.ascontiguousarray(img.pixels[..., ::-1]),
        label=img.label,
        coarse_label=img.coarse_label,
    )


def random_hflip(
    images: np.ndarray, rng: np.random.Generator, probability: float = FLIP_PROBABILITY
) -> np.ndarray:
    """Flip each image of a (n, c, h, w) batch independently with ``probability``."""
    flip = rng.random(images.shape[0]) < probability
    out = images.copy()
    out[flip] = images[flip][..., ::-1]
    return out
