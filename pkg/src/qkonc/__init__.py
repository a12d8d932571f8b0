"""Simulation and analysis toolkit for concentration in quantum kernel methods.

The package simulates qubit feature maps, evaluates fidelity and projected
kernels exactly or through shot-based estimators, and checks the measured
statistics against analytic concentration, expressivity, entanglement, and
noise bounds.  Hot state-evolution loops run through numba when available;
set ``QKONC_BACKEND=numpy`` to force the pure-numpy fallback.
"""

__version__ = "0.1.0"

from ._accel import active_backend
from .core import (
    BlochVector,
    DensityMatrix,
    Gate,
    StateVector,
    apply_gate,
    apply_gate_batch,
    apply_gate_dm,
    bloch_vector,
    bloch_vectors,
    computational_basis_state,
    fidelity,
    ghz_state,
    haar_random_state,
    haar_random_states,
    haar_random_unitary,
    hs_inner,
    maximally_mixed,
    purity,
    reduce_to_qubit,
    relative_entropy,
    sandwiched_renyi2_vs_maxmixed,
    schatten2_distance,
    trace_distance,
    trace_norm,
)
from .embeddings import FAMILIES, EmbeddingSpec, embed, embed_batch, layer_decomposition
from .estimators import (
    STRATEGIES,
    EstimatorSpec,
    ShotRecord,
    estimate_fidelity,
    estimate_loschmidt,
    estimate_projected,
    estimate_swap,
    loschmidt_record,
    sample_biased_rand_kappa,
    sample_rand_kappa,
    swap_record,
)
from .kernels import (
    GramMatrix,
    KernelKind,
    closed_form_product_fidelity,
    closed_form_product_fidelity_batch,
    closed_form_product_projected,
    closed_form_product_projected_batch,
    fidelity_kernel,
    gram,
    kernel_matrix,
    product_bloch_vectors,
    projected_kernel,
    projected_sq_distance,
)
from .noise import (
    NoiseBounds,
    PauliNoiseParams,
    apply_local_pauli_channel,
    noise_bounds,
    noisy_embed,
    noisy_fidelity_kernel,
    noisy_projected_kernel,
)
from .analysis import (
    ConcentrationReport,
    EntanglementBound,
    ExpressivityEstimate,
    beta_haar,
    beta_haar_projected,
    binomial_pvalue,
    bound_entanglement,
    bound_expressivity,
    bound_global_measurement,
    concentration_scan,
    distinguish_success_bound,
    expressivity_epsilon,
    expressivity_from_states,
    gamma_s_from_bloch,
    haar_twofold_moment,
    helstrom_bound,
    kta_alignment_constant,
    kta_variance_bound,
    product_ry_moments,
    record_pvalue,
    shots_budget,
    simulate_distinguish,
    variance_scan,
)
from .learning import (
    GeneralizationResult,
    KrrResult,
    SvmResult,
    TrainedModel,
    generalization_experiment,
    kernel_target_alignment,
    krr_fit,
    kta_variance_over_theta,
    predict,
    svm_fit,
    train_krr,
    train_svm,
)
from .datasets import Dataset, engineered_labels, gen_hypercube, gen_uniform, load_csv, save_csv

__all__ = [name for name in dir() if not name.startswith("_")]
