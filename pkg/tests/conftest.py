import numpy as np
import pytest

from rauzygasket import thermo


@pytest.fixture(scope="session")
def kappa0_n20():
    return thermo.solve_kappa0(20)


@pytest.fixture(scope="session")
def chain_n20(kappa0_n20):
    return thermo.gibbs_chain(thermo.build_transfer(20, kappa0_n20))


@pytest.fixture(scope="session")
def gibbs_spectra(chain_n20):
    """Eight 1e6-step spectra at kappa0 (shared by the acceptance criteria)."""
    from rauzygasket import lyapunov

    out = []
    for seed in range(1, 9):
        stream = thermo.sample_step_arrays(chain_n20, 1_000_000, seed=seed)
        out.append(lyapunov.lyapunov_spectrum(stream, variant="B",
                                              source="gibbs", seed=seed))
    return out


@pytest.fixture(scope="session")
def gibbs_ratio(gibbs_spectra):
    from rauzygasket import lyapunov

    vals = np.array([lyapunov.diffusion_rate(s)[0] for s in gibbs_spectra])
    return float(vals.mean())
