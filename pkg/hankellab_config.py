LINALG_CONFIG = {
    # Power iteration stopping rule: ||M*Mv - lam v|| / lam
    "tol": 1e-11,
    "max_iters": 20000,

    # Dense SVD / eigh replaces power iteration at or below this size
    "dense_limit": 256,

    # Seed of the single restart vector
    "restart_seed": 0,

    # Hermitian inputs are symmetrized; larger defects are rejected
    "hermitian_tol": 1e-9,
}

SPACES_CONFIG = {
    # Radial Gauss-Jacobi rule in s = (r^2)^(1/grading)
    "radial_nodes": 64,
    "radial_grading": 4,

    # p=1 angular grid is angular_per_degree * (degree + 1) points
    "angular_per_degree": 8,

    # Slack on |z| <= 1 for evaluation
    "evaluation_slack": 1e-12,

    # Bloch sup: polar grid, then local x8 subdivision around the best cell
    "bloch_radial_levels": 64,
    "bloch_angular_points": 128,
    "bloch_refine_rounds": 6,
    "bloch_refine_factor": 8,

    # Carleson arcs: dyadic levels 0..K plus arcs centred on atoms
    "carleson_levels": 10,
}

FUNCTIONALS_CONFIG = {
    # w-grid for the weak BMOA and reproducing kernel sweeps
    "w_radii": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99],
    "w_angles": 32,
    "w_refine_rounds": 1,
    "w_refine_factor": 8,

    # Kernel series k_w truncated once |w|^n drops below this
    "kernel_tail_tol": 1e-16,
    "kernel_max_degree": 20000,

    # Auxiliary beta = max(2, 1 + alpha) + margin
    "aux_beta_margin": 1.0,
}

EXPERIMENT_CONFIG = {
    "threads": 1,
    "threads_env": "HANKELLAB_THREADS",

    "dp1_ladder": [63, 255, 1023, 4095],
    "dp2_ladder": [16, 64, 256, 1024],
    "dp2_gaussian_draws": 32,
    # Steps per start of the trace-norm ascent witness
    "dp2_ascent_iters": 12,

    # Schur ratios are certified with dense SVD up to this size
    "dp2_dense_limit": 2048,

    "lemma_order_n": 512,
    "lemma_order_l_max": 12,
    "lacunary_terms": 8,

    # Resource sample after each finished task
    "resource_logging": True,
}

# Application Settings
APP_CONFIG = {
    "app_name": "hankellab",
    "version": "1.0.0",
    "schema": 1,
    "log_level": "INFO",
    "debug": False
}
