"""Entry point: load the model, then serve; a failed load exits nonzero."""

import argparse
import sys

from pydantic import ValidationError

from .config import ServiceConfig
from .model import ModelLoadError


def build_config(argv=None) -> ServiceConfig:
    parser = argparse.ArgumentParser(
        prog="fillmask-service",
        description="Serve fill-mask / next-word probabilities for one pretrained model.",
    )
    parser.add_argument("--model", required=True, help="Model id or local checkpoint path.")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--max-top-k", type=int, default=200, dest="max_top_k")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--max-concurrency", type=int, default=4, dest="max_concurrency")
    args = parser.parse_args(argv)
    try:
        return ServiceConfig(**vars(args))
    except ValidationError as exc:
        parser.error(str(exc))


def main(argv=None):
    config = build_config(argv)
    try:
        from .app import create_app

        app = create_app(config)
    except ModelLoadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        sys.exit(1)

    import uvicorn

    uvicorn.run(app, host=config.host, port=config.port)


if __name__ == "__main__":
    main()
