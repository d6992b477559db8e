"""Access to the example distributions and scenarios shipped with the package."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .distribution import JointDistribution, parse_text

# builtin case name -> file name
BUILTINS = {
    "xor": "xor.dist",
    "copy": "copy.dist",
    "left-mono": "leftmono.dist",
    "sec7": "sec7.dist",
    "sec8": "sec8.scenario",
}


def data_dir() -> Path:
    return Path(str(resources.files("sharedinfo") / "data"))


def builtin_path(name: str) -> Path:
    try:
        return data_dir() / BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}") from None


def resolve(path) -> Path:
    """An existing path as given, else a bundled file with that name."""
    p = Path(path)
    if p.exists():
        return p
    bundled = data_dir() / p.name
    if bundled.exists():
        return bundled
    raise FileNotFoundError(path)


def load_case(name: str) -> tuple[JointDistribution, dict[str, str]]:
    return parse_text(builtin_path(name).read_text())


def load_dist(name: str) -> JointDistribution:
    return load_case(name)[0]
