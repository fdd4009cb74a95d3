"""Access to the shipped example models."""

from importlib import resources


def example_text(name: str) -> str:
    return resources.files("polyinv").joinpath("examples", name).read_text()
