"""Exception hierarchy shared across the pipeline.

Every error class maps to a distinct CLI exit code (see cli.EXIT_CODES).
"""


class WebtrailsError(Exception):
    """Base class for all pipeline errors."""


# --- site graph ---------------------------------------------------------


class SiteGraphError(WebtrailsError):
    """Base for site-graph document problems."""


class SiteGraphParseError(SiteGraphError):
    pass


class DanglingTargetError(SiteGraphError):
    """A navigation/submit target references a page that does not exist."""


class RevealCycleError(SiteGraphError):
    """A reveal chain loops back onto one of its ancestors."""


# --- environment --------------------------------------------------------


class EnvironmentError_(WebtrailsError):
    """Base for environment/session errors."""


class EnvironmentUnreachable(EnvironmentError_):
    pass


class SessionClosed(EnvironmentError_):
    pass


class ElementNotFound(EnvironmentError_):
    """The targeted element id is not defined on the current page."""


class ElementNotVisible(ElementNotFound):
    """The element exists but is hidden behind an unexpanded menu."""


class ActionNotApplicable(EnvironmentError_):
    """The action kind cannot be dispatched to the targeted element role."""


class SubmitMissingRequired(EnvironmentError_):
    """A submit fired while one of its required fields was still empty."""


class NavigationTimeout(EnvironmentError_):
    """Live backend: the remote browser did not settle within the deadline."""


class ReplayDivergence(EnvironmentError_):
    """Replaying a stored trace failed or landed on an unexpected page."""


# --- oracle / remote endpoints ------------------------------------------


class OracleUnavailable(WebtrailsError):
    """The reasoning endpoint cannot be reached."""


class SchemaViolation(WebtrailsError):
    """An oracle response failed schema validation after all retries."""


class AgentEndpointUnavailable(WebtrailsError):
    pass


class EmbedderUnavailable(WebtrailsError):
    pass


# --- export / metrics ----------------------------------------------------


class UnrefinedTuple(WebtrailsError):
    """SFT export was asked to convert a tuple that never passed refinement."""


class MissingScreenshot(WebtrailsError):
    """A dataset record references an image absent from the run's store."""


class BackendMismatch(WebtrailsError):
    """Coverage reports require a simulator-backend run directory."""


class FewerThanTwoTitles(WebtrailsError):
    """Diversity needs at least two titles to be meaningful."""


class RunDirectoryLocked(WebtrailsError):
    """Another CLI process currently owns the run directory."""
