"""Reference server for the AVSP v1 wire protocol: wraps image-to-image
victims (identity echo, Gaussian blur) behind TCP or stdio transports."""

from .framing import FrameError, encode_frame, parse_stream
from .victims import VICTIMS, blur_render, identity_render

__all__ = ["FrameError", "encode_frame", "parse_stream", "VICTIMS",
           "blur_render", "identity_render"]
