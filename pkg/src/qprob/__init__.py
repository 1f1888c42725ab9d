"""qprob: a workbench for quantum probability on finite event structures."""

__version__ = "0.1.0"

from . import cli, core, exactlp, gamble, lattice, polytope, projgeom, witness  # noqa: F401
