"""Completely symmetric multipartite states: construction, separability
certificates with constructive decompositions, geometric entanglement of
nonnegative states, and moment-matrix structure tools."""

from .engine import (Certificate, bisep_equals_fullsep_check, classify,
                     classify_symmetric, peel, s_decompose)
from .gme import (brute_force_overlap, gme_closed_form, gme_power_iteration,
                  overlap_contraction, two_copy, verify_kkt)
from .named_states import (EXAMPLES, NamedState, build_blokovi,
                           build_entangled_rank6, build_gme_conditioned,
                           build_h_perturbation, build_h_test_state,
                           build_sigma, blokovi_rows, check_edge_extreme,
                           conditioned_lambdas, get_example)
from .product_search import (ProductVector, ProductVectorSet,
                             bipartite_product_vectors,
                             grid_symmetric_product_scan,
                             symmetric_decompose_pure,
                             symmetric_product_vectors, takagi)
from .reducibility import Reduction, decompose_direct_sum, find_reduction
from .serialize import (canonical_json, certificate_to_document,
                        document_to_state, gme_to_document,
                        state_to_document)
from .states import (DensityMatrix, Subspace, apply_rilo, bipartition_view,
                     is_cs, is_ppt, is_supported, marginal_equality,
                     partial_trace, partial_transpose, ppt_min_eigenvalue,
                     range_kernel, rank_of, restrict_to_support,
                     single_party_marginal)
from .structured import (DickeMatrix, fejer_moments, hankel_psd_decompose,
                         hankel_to_state, multiqubit_decompose,
                         state_to_dicke_matrix, toeplitz_scan,
                         toeplitz_to_state)
from .tensors import (SymTensor, dicke, dicke_basis, kron_power,
                      project_symmetric)

__version__ = "0.1.0"

__all__ = [
    "Certificate", "DensityMatrix", "DickeMatrix", "EXAMPLES", "NamedState",
    "ProductVector", "ProductVectorSet", "Reduction", "Subspace", "SymTensor",
    "apply_rilo", "bipartite_product_vectors", "bipartition_view",
    "bisep_equals_fullsep_check", "blokovi_rows", "brute_force_overlap",
    "build_blokovi", "build_entangled_rank6", "build_gme_conditioned",
    "build_h_perturbation", "build_h_test_state", "build_sigma",
    "canonical_json", "certificate_to_document", "check_edge_extreme",
    "classify", "classify_symmetric", "conditioned_lambdas",
    "decompose_direct_sum", "dicke", "dicke_basis", "document_to_state",
    "fejer_moments", "find_reduction", "get_example", "gme_closed_form",
    "gme_power_iteration", "gme_to_document", "grid_symmetric_product_scan",
    "hankel_psd_decompose", "hankel_to_state", "is_cs", "is_ppt",
    "is_supported", "kron_power", "marginal_equality",
    "multiqubit_decompose", "overlap_contraction", "partial_trace",
    "partial_transpose", "peel", "ppt_min_eigenvalue", "project_symmetric",
    "range_kernel", "rank_of", "restrict_to_support", "s_decompose",
    "single_party_marginal", "state_to_dicke_matrix", "state_to_document",
    "symmetric_decompose_pure", "symmetric_product_vectors", "takagi",
    "toeplitz_scan", "toeplitz_to_state", "two_copy", "verify_kkt",
]
