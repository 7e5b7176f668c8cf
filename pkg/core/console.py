import typer

_verbose = False


def set_verbose(enabled: bool):
    global _verbose
    _verbose = enabled


def trace(tag: str, message: str, **style):
    """Progress line on stderr, shown only in verbose mode."""
    if _verbose:
        style.setdefault("dim", True)
        typer.secho(f"  [{tag}] {message}", err=True, **style)


def info(tag: str, message: str, **style):
    typer.secho(f"[{tag}] {message}", err=True, **style)


def error(tag: str, message: str):
    typer.secho(f"[{tag}] Error: {message}", err=True, fg=typer.colors.RED, bold=True)
