from ddshaper.dsp.ambiguity import (
    af_lattice_from_zak,
    AmbiguityCut,
    AmbiguitySurface,
    corollary1_closed_form,
    cross_ambiguity,
    cut_axes,
    dd_inner_product,
    extract_cut,
    localized_af_prediction,
    matched_filter_identity,
    pulse_ambiguity,
    theorem1_decomposition,
    theorem3_af,
    zak_product_series,
)
from ddshaper.dsp.basis import (
    basis_family,
    BasisId,
    dd_basis_image,
    freq_basis_pulsone,
    ImpulseTrain,
    realize_pulsone,
    time_basis_from_atoms,
    time_basis_pulsone,
    truncate_basis,
    truncated_pulse,
)
from ddshaper.dsp.windows import (
    asinc_eval,
    AtomPair,
    orthogonality_check,
    periodicity_check,
    realize_window,
    spectral_transform,
    window_dual,
    window_energy,
)
from ddshaper.dsp.zakcore import (
    dzt,
    idzt,
    inverse_zak,
    quasi_periodicity_check,
    twisted_shift,
    zak_transform,
    ZakImage,
    ZakMatrix,
)
