"""Command-line entry point: ``pedforge serve``."""

from __future__ import annotations

import os
from pathlib import Path

import click
import uvicorn

from .api import ServeConfig, create_app


@click.group()
def main():
    """Workbench for co-designing educational games through a shared
    controlled sentence."""


@main.command()
@click.option("--port", default=8077, show_default=True, help="Port to bind.")
@click.option(
    "--data-dir",
    required=True,
    type=click.Path(path_type=Path),
    help="Directory holding the per-project files.",
)
@click.option(
    "--mock-llm",
    "mock_seed",
    type=int,
    default=None,
    help="Use the deterministic offline provider with this seed.",
)
@click.option("--host", default="127.0.0.1", show_default=True, help="Bind address.")
def serve(port: int, data_dir: Path, mock_seed: int | None, host: str):
    """Run the HTTP service (single worker; one writer per project)."""
    ui_dir = os.environ.get("PEDFORGE_UI_DIR")
    config = ServeConfig(
        data_dir=data_dir,
        mock_seed=mock_seed,
        host=host,
        port=port,
        ui_dir=Path(ui_dir) if ui_dir else None,
    )
    try:
        app = create_app(config)
    except Exception as err:
        raise click.ClickException(str(err)) from err
    uvicorn.run(app, host=host, port=port, workers=1)


if __name__ == "__main__":
    main()
