import numpy as np
import pytest

from ridgepoly.dataset import Pattern


def make_patterns(rng, n, m=2, lo=0.2, hi=0.8):
    """Synthetic in-range pattern sequence for trainer tests."""
    return [Pattern(inputs=rng.uniform(lo, hi, m),
                    target=float(rng.uniform(lo, hi)),
                    t_index=t)
            for t in range(n)]


@pytest.fixture(scope="session")
def warm_kernels():
    """Touch every compiled kernel once so timed tests measure the algorithm,
    not JIT compilation."""
    import ridgepoly as rp

    rng = np.random.default_rng(0)
    pats = make_patterns(rng, 8)
    net = rp.new_network(rp.FeedbackMode.ERROR_OUTPUT, 2, rng=rng)
    cfg = rp.TrainerConfig(max_epochs=2, seed=0)
    rp.gradient_check(net, pats, cfg, epsilon=1e-6)
    fitted, _ = rp.constructive_fit(pats, cfg, rp.FeedbackMode.ERROR_OUTPUT)
    norm = rp.NormParams(min1=0.0, max1=1.0)
    rp.evaluate(fitted, pats, norm)
    return True
