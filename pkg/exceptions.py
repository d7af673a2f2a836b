"""
Error hierarchy for the community detection toolkit.

Input problems map to exit code 2 and solver failures to exit code 3.
"""


class CommunityDetectionError(Exception):
    """Base class for every error raised by this package."""


class InputError(CommunityDetectionError, ValueError):
    """Bad user input: files, flags or generator specifications."""


class GraphParseError(InputError):
    """Malformed edge-list content."""

    def __init__(self, message, line_number=None):
        self.line_number = line_number
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)


class LabelFileError(InputError):
    """Malformed or mismatched label file."""


class ConfigError(InputError):
    """A configuration value is outside its valid range."""


class InfeasibleSpecError(InputError):
    """A synthetic graph specification cannot be realized."""


class SolverError(CommunityDetectionError):
    """Numerical failure inside the optimization pipeline."""

    def __init__(self, message, iteration=None, lam=None):
        self.iteration = iteration
        self.lam = lam
        context = []
        if iteration is not None:
            context.append(f"iteration {iteration}")
        if lam is not None:
            context.append(f"lambda={lam:.6g}")
        if context:
            message = f"{message} ({', '.join(context)})"
        super().__init__(message)


class ManifoldError(SolverError):
    """A matrix is too far from the Stiefel manifold to be repaired."""


class RetractionDomainError(SolverError):
    """Points or directions outside the domain of the retraction or its inverse."""


class ProxConvergenceError(SolverError):
    """The tangent-space proximal subproblem did not reach its tolerance."""

    def __init__(self, message, best_residual, iterations):
        self.best_residual = best_residual
        self.iterations = iterations
        super().__init__(f"{message}: best residual {best_residual:.3e} after {iterations} iterations")
