"""Ricci, deflection and Bianchi identity suites with symbolic and numeric checking."""

from .bianchi import BIANCHI_CLASSES, IDENTITY_12_READINGS, bianchi_residuals, bianchi_terms
from .context import DVectorField, IdentityContext, cartan_source, liouville_field
from .generic import (
    BIANCHI_MAPPING,
    GenericContext,
    bianchi_mapping_check,
    generic_bianchi_residuals,
    generic_ricci_residuals,
    mapping_signs,
    scramble_families,
)
from .report import MODES, Instance, SamplingConfig, VerificationReport, numeric_verify
from .ricci import (
    READINGS,
    DeflectionTensors,
    deflection_identity_residuals,
    deflection_oracle,
    deflection_tensors,
    ricci_residuals,
)

__all__ = [
    "BIANCHI_CLASSES",
    "BIANCHI_MAPPING",
    "IDENTITY_12_READINGS",
    "MODES",
    "READINGS",
    "DVectorField",
    "DeflectionTensors",
    "GenericContext",
    "IdentityContext",
    "Instance",
    "SamplingConfig",
    "VerificationReport",
    "bianchi_mapping_check",
    "bianchi_residuals",
    "bianchi_terms",
    "cartan_source",
    "deflection_identity_residuals",
    "deflection_oracle",
    "deflection_tensors",
    "generic_bianchi_residuals",
    "generic_ricci_residuals",
    "liouville_field",
    "mapping_signs",
    "numeric_verify",
    "ricci_residuals",
    "scramble_families",
]
