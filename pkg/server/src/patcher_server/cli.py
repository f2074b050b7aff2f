"""Command-line entry point: configure and run the sidecar."""

from __future__ import annotations

import logging
from pathlib import Path

import click

from .app import ModelServerApp
from .config import DEFAULT_MODEL_ID, ServerConfig
from .serving import make_http_server


@click.command()
@click.version_option(package_name="patcher-server")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8441, type=int, show_default=True)
@click.option("--model-id", default=DEFAULT_MODEL_ID, show_default=True,
              help="Checkpoint name reported by /v1/health.")
@click.option("--device", default="cpu", show_default=True)
@click.option("--store", type=click.Path(path_type=Path), default=None,
              help="Directory for generated image records (omit to keep none).")
@click.option("--max-pending", default=4, show_default=True, type=int,
              help="Generation requests admitted at once before answering 429.")
@click.option("--verbose", is_flag=True, help="Log every request.")
def main(host, port, model_id, device, store, max_pending, verbose):
    """Serve the v1 model sidecar protocol over HTTP."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING)
    config = ServerConfig(
        model_id=model_id, device=device, image_store=store,
        max_pending=max_pending,
    )
    app = ModelServerApp(config=config)
    server = make_http_server(app, host, port)
    click.echo(f"{model_id} listening on http://{host}:{server.server_port}", err=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


if __name__ == "__main__":
    main()
