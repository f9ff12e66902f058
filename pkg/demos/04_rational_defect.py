# A rational slope: the limit is the Hecke-correspondence average, not the product.
from pathlib import Path

import numpy as np

from horolab import compare_report, horocycle_run
from horolab.config import load
from horolab.experiments import correspondence_distances

cfg = load(Path(__file__).parent / "configs" / "two_thirds.cfg")
run = horocycle_run(cfg)
print(compare_report(run))

# every reduced pair sits on one of the 12 branches of the correspondence
x = np.random.default_rng(1).uniform(0, 1, 20000)
d = correspondence_distances(x, 1e4, 2, 3)
print(f"max distance to the correspondence: {d.max():.2e}")
