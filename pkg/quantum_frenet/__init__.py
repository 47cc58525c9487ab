"""quantum_frenet - Curvature and torsion of quantum evolutions."""

try:
    from ._version import get_versions
    __version__ = get_versions()["version"]
except ImportError:
    from importlib.metadata import PackageNotFoundError, version

    try:
        __version__ = version("quantum_frenet")
    except PackageNotFoundError:
        __version__ = "0+unknown"
