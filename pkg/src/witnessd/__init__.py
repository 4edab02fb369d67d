"""witnessd: proof-of-process evidence for keyboard-produced documents.

The pipeline seals every keystroke with an HMAC-derived microsecond jitter
value bound to the session secret, keystroke ordinal, document state, typing
zone transition, and rhythm bucket; chains the samples with SHA-256; logs
them in an append-only Merkle Mountain Range; proves elapsed time with
verifiable-delay checkpoints; and bounds wall-clock claims with external
timestamp receipts.  Disputing a packet means attacking a specific layer,
and the verification report names which one.
"""

from .adversary import TrialConfig, TrialReport, run_trials
from .errors import WitnessdError
from .input_model import (
    KeyEvent,
    MatchSummary,
    TimingProfile,
    ValidatedEvent,
    ZoneMap,
    match_streams,
    simulate_session,
)
from .jitter_seal import (
    JitterSample,
    SealChain,
    SessionParams,
    SessionSecret,
    derive_jitter,
    seal_keystroke,
    setup,
    verify_chain,
)
from .packet import (
    EvidencePacket,
    PacketHeader,
    TrustConfig,
    VerificationReport,
    assemble_packet,
    deserialize,
    serialize,
    verify_packet,
)
from .pipeline import RecordResult, record_session
from .vdf import VdfCheckpoint, VdfParams, VdfProof, vdf_eval, vdf_prove, vdf_verify

__version__ = "0.1.0"

__all__ = [
    "EvidencePacket",
    "JitterSample",
    "KeyEvent",
    "MatchSummary",
    "PacketHeader",
    "RecordResult",
    "SealChain",
    "SessionParams",
    "SessionSecret",
    "TimingProfile",
    "TrialConfig",
    "TrialReport",
    "TrustConfig",
    "ValidatedEvent",
    "VdfCheckpoint",
    "VdfParams",
    "VdfProof",
    "VerificationReport",
    "WitnessdError",
    "ZoneMap",
    "assemble_packet",
    "derive_jitter",
    "deserialize",
    "match_streams",
    "record_session",
    "run_trials",
    "seal_keystroke",
    "serialize",
    "setup",
    "simulate_session",
    "vdf_eval",
    "vdf_prove",
    "vdf_verify",
    "verify_chain",
    "verify_packet",
    "__version__",
]
