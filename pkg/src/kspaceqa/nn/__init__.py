from .layers import (Conv2D, Dense, Dropout, Flatten, GradientReversal, Layer,
                     MaxPool2, ReLU, conv2d_backward, conv2d_forward)
from .complex_layers import (ComplexPointwise, ComplexToReal, ModReLU,
                             SpectralPool)
from .loss import softmax, softmax_cross_entropy
from .optim import Adam
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "Adam", "ComplexPointwise", "ComplexToReal", "Conv2D", "Dense", "Dropout",
    "Flatten", "GradientReversal", "Layer", "MaxPool2", "ModReLU", "ReLU",
    "SpectralPool", "conv2d_backward", "conv2d_forward", "load_checkpoint",
    "save_checkpoint", "softmax", "softmax_cross_entropy",
]
