from ._kgsplit import (  # noqa: F401
    __version__,
    appendix_c_family,
    auto_bits,
    c_in_prime,
    classify_frequency,
    duffing_homoclinic,
    extract_stokes,
    lambda_n,
    measure_splitting,
    melnikov_quadrature,
    mu_n,
    required_bits,
    toy_splitting_closed_form,
    toy_splitting_numeric,
)
