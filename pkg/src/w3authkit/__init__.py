"""Tools for testing Web3 challenge-response logins.

``checker`` scans a login deployment for weak message, nonce and signature
handling, ``guard`` warns a wallet user before signing another site's login
message, and ``vulnsim`` serves configurable vulnerable deployments to test
both against.
"""

from .checker import Finding, NonceKind, RiskLevel, ScanReport, Scanner, Verdict, craft_bmma_message
from .flexrequest import Policy, TargetConfig, load_targets
from .guard import AlertDecision, MessageTemplate, TemplateStore, check_signature_request, record_login
from .message_model import FieldKind, ParsedMessage, detect_variable_spans, parse_message
from .vulnsim import SimServer, SimulatedSite, VulnProfile, fixture_table2, table1_profiles
from .wallet_crypto import KeyPair, keypair_from_seed, personal_sign, recover_address, to_checksum_address

__version__ = "0.1.0"

__all__ = [
    "AlertDecision",
    "FieldKind",
    "Finding",
    "KeyPair",
    "MessageTemplate",
    "NonceKind",
    "ParsedMessage",
    "Policy",
    "RiskLevel",
    "ScanReport",
    "Scanner",
    "SimServer",
    "SimulatedSite",
    "TargetConfig",
    "TemplateStore",
    "Verdict",
    "VulnProfile",
    "check_signature_request",
    "craft_bmma_message",
    "detect_variable_spans",
    "fixture_table2",
    "keypair_from_seed",
    "load_targets",
    "parse_message",
    "personal_sign",
    "record_login",
    "recover_address",
    "table1_profiles",
    "to_checksum_address",
]
