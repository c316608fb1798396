"""Von Mises order reduction, RF-pairs and Bäcklund pairs for nonlinear PDEs."""

__version__ = "0.1.0"
