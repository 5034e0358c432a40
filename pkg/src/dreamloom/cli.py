"""Operator command line: serve the API, seed the demo, batch-extract
palettes, and validate bundles.

Exit codes: 0 success, 1 domain failure, 2 usage error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from . import palette as palette_mod
from .config import AppConfig, parse_bind
from .errors import DreamloomError
from .providers import ProviderMode
from .store import validate_bundle as run_validate_bundle


@click.group()
def main():
    """Studio for metaphorical visual dream stories."""


@main.command()
@click.option("--bind", default="127.0.0.1:8700", show_default=True, help="host:port to listen on")
@click.option("--data-dir", default="./dreamloom-data", show_default=True, type=click.Path())
@click.option(
    "--provider-mode",
    type=click.Choice([m.value for m in ProviderMode]),
    default=None,
    help="override MM_PROVIDER_MODE",
)
@click.option("--templates", type=click.Path(exists=True), default=None, help="prompt template file")
@click.option("--cors-origin", default=None, help="allowed browser origin")
def serve(bind, data_dir, provider_mode, templates, cors_origin):
    """Run the HTTP service."""
    from .api import serve as run_serve

    host, port = parse_bind(bind)
    overrides: dict = {
        "data_dir": Path(data_dir),
        "bind_host": host,
        "bind_port": port,
    }
    if templates:
        overrides["templates_path"] = Path(templates)
    if cors_origin:
        overrides["cors_origin"] = cors_origin
    provider_overrides = {}
    if provider_mode:
        provider_overrides["mode"] = ProviderMode(provider_mode)
    config = AppConfig.from_env(provider_overrides=provider_overrides, **overrides)
    try:
        run_serve(config)
    except DreamloomError as exc:
        raise click.ClickException(str(exc))


@main.command("seed-demo")
@click.option("--data-dir", default="./dreamloom-data", show_default=True, type=click.Path())
@click.option("--templates", type=click.Path(exists=True), default=None)
def seed_demo(data_dir, templates):
    """Create the bundled four-scene demo story (mock providers, no keys)."""
    from .demo import seed_demo as run_seed

    try:
        bundle = run_seed(data_dir, templates)
    except DreamloomError as exc:
        raise click.ClickException(str(exc))
    click.echo(str(bundle))


@main.command("palette")
@click.argument("images", nargs=-1, required=True, type=click.Path())
@click.option("-k", "k", default=8, show_default=True, type=click.IntRange(min=1))
@click.option(
    "--format",
    "fmt",
    type=click.Choice(["table", "tsv"]),
    default="table",
    show_default=True,
)
def palette_batch(images, k, fmt):
    """Extract dominant colors from image files."""
    failed = False
    for path in images:
        try:
            data = Path(path).read_bytes()
            extracted = palette_mod.extract_palette(data, k=k)
        except (OSError, DreamloomError) as exc:
            failed = True
            if fmt == "tsv":
                click.echo(f"{path}\tERROR\t{exc}")
            else:
                click.echo(f"{path}: error: {exc}", err=True)
            continue
        if fmt == "tsv":
            for entry in extracted.entries:
                click.echo(f"{path}\t{entry.color.hex}\t{entry.weight:.4f}")
        else:
            click.echo(path)
            for entry in extracted.entries:
                click.echo(f"  {entry.color.hex}  {entry.weight:.4f}")
    if failed:
        sys.exit(1)


@main.command("validate-bundle")
@click.argument("path", type=click.Path(exists=True))
def validate_bundle(path):
    """Check a story bundle against every invariant; exit 0 only if clean."""
    report = run_validate_bundle(path)
    if report.clean:
        click.echo(f"{path}: clean")
        return
    click.echo(f"{path}: {len(report.violations)} violation(s)")
    for violation in report.violations:
        click.echo(f"  - {violation}")
    sys.exit(1)


if __name__ == "__main__":
    main()
