from .core import Tensor, concat, gather_rows, no_grad
from .nn import (
    AttentionParams,
    FeedForwardParams,
    cosine_similarity,
    dropout,
    feed_forward,
    layer_norm,
    linear,
    multi_head_attention,
    relu,
    softmax,
)
from .optim import Adam, clip_gradients, global_grad_norm, uniform_fan_in, zeros, ones
from .checkpoint import config_digest, load_checkpoint, save_checkpoint

__all__ = [
    "Tensor",
    "concat",
    "gather_rows",
    "no_grad",
    "AttentionParams",
    "FeedForwardParams",
    "cosine_similarity",
    "dropout",
    "feed_forward",
    "layer_norm",
    "linear",
    "multi_head_attention",
    "relu",
    "softmax",
    "Adam",
    "clip_gradients",
    "global_grad_norm",
    "uniform_fan_in",
    "zeros",
    "ones",
    "config_digest",
    "load_checkpoint",
    "save_checkpoint",
]
