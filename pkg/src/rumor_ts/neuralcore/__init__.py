from .gradcheck import gradient_check
from .layers import (
    GRU,
    LSTM,
    Bidirectional,
    Dense,
    Dropout,
    Flatten,
    Layer,
    SimpleRNN,
    sigmoid,
    uniform_init,
)
from .losses import one_hot, softmax, softmax_cross_entropy
from .network import Network
from .optim import Adam

__all__ = [
    "Adam",
    "Bidirectional",
    "Dense",
    "Dropout",
    "Flatten",
    "GRU",
    "LSTM",
    "Layer",
    "Network",
    "SimpleRNN",
    "gradient_check",
    "one_hot",
    "sigmoid",
    "softmax",
    "softmax_cross_entropy",
    "uniform_init",
]
