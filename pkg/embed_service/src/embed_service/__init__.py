from .app import create_app
from .encoders import HashedEncoder, TransformerEncoder, build_encoder

__all__ = ["HashedEncoder", "TransformerEncoder", "build_encoder", "create_app"]
