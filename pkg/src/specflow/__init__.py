"""Global eigenvalue behaviour of rank-one perturbation families B(tau) = A + tau*u*v^H."""

__version__ = "0.1.0"
