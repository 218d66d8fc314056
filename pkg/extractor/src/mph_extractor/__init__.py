"""mph-extractor: MediaPipe Holistic video extraction to browkit/1 interchange."""

from .backends import BACKENDS, ExtractorError, HolisticBackend, StubBackend
from .extract import ExtractionJob, ExtractionSummary, extract_video
from .interchange import FACEMESH_ROLES, INTERCHANGE_VERSION

__version__ = "0.1.0"
