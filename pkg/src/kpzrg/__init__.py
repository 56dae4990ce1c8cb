"""kpzrg: renormalisation algebra, power counting and lattice experiments
for polynomial growth models in the KPZ class."""

__version__ = "0.1.0"
