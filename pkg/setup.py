"""Setup shim for quantum_frenet; the version comes from git tags through versioneer."""
from setuptools import setup
import versioneer

setup(
    version=versioneer.get_version(),
    cmdclass=versioneer.get_cmdclass(),
)
