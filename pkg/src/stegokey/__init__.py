"""Keyed LSB steganography, stego-key recovery by correlation attack, and
unicity-distance bounds."""

__version__ = "0.1.0"

from .attack import AttackResult, GridKeySpace, ExplicitKeySpace, correlation_attack, score_key
from .codec import CapacityError, EmbedConfig, KeyCandidate, embed, extract, hamming_distortion, keyed_path
from .image import GrayImage
from .noise import NoiseField, compute_noise, estimate_rate, estimate_sigma2, spatial_average_filter
from .stats import AttackPlan, MixtureModel, build_mixture, inverse_q, plan_attack, q_function
from .theory import TheoryParams, binary_entropy, hiding_capacity, hiding_redundancy, spurious_key_bound, unicity_lower_bound

__all__ = [
    "AttackPlan", "AttackResult", "CapacityError", "EmbedConfig", "ExplicitKeySpace", "GrayImage",
    "GridKeySpace", "KeyCandidate", "MixtureModel", "NoiseField", "TheoryParams", "binary_entropy",
    "build_mixture", "compute_noise", "correlation_attack", "embed", "estimate_rate", "estimate_sigma2",
    "extract", "hamming_distortion", "hiding_capacity", "hiding_redundancy", "inverse_q", "keyed_path",
    "plan_attack", "q_function", "score_key", "spatial_average_filter", "spurious_key_bound",
    "unicity_lower_bound",
]
