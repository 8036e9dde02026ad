"""Service launcher."""

from __future__ import annotations

import argparse

import uvicorn

from .app import DEFAULT_BATCH_CAP, create_app
from .encoders import DEFAULT_MODEL, build_encoder


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="unit-norm string embedding service")
    parser.add_argument("--backend", choices=["transformer", "hashed"],
                        default="transformer",
                        help="encoder backend (default: transformer)")
    parser.add_argument("--model", default=DEFAULT_MODEL,
                        help="model id for the transformer backend")
    parser.add_argument("--dim", type=int, default=256,
                        help="vector width for the hashed backend")
    parser.add_argument("--batch-cap", type=int, default=DEFAULT_BATCH_CAP)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8200)
    args = parser.parse_args(argv)

    encoder = build_encoder(args.backend, args.model, args.dim)
    app = create_app(encoder, batch_cap=args.batch_cap)
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
