from dataclasses import dataclass


@dataclass
class LsmPrior:
    """Priors for latent space and latent position cluster models.

    alpha ~ N(alpha_mean, alpha_var); z_i ~ N(0, z_var I) without clustering.
    With clusters: mu_g ~ N(0, mu_var I), sigma2_g ~ InvGamma(sigma2_shape,
    sigma2_scale), weights ~ Dirichlet(dirichlet, ..., dirichlet).
    """

    alpha_mean: float = 0.0
    alpha_var: float = 4.0
    z_var: float = 1.0
    mu_var: float = 4.0
    sigma2_shape: float = 2.0
    sigma2_scale: float = 1.0
    dirichlet: float = 1.0

    def __post_init__(self):
        for name in ("alpha_var", "z_var", "mu_var", "sigma2_shape", "sigma2_scale", "dirichlet"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
