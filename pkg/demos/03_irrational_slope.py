# An irrational slope: the horocycle pair equidistributes to the product measure.
import math
from pathlib import Path

from horolab import compare_report, horocycle_run
from horolab.config import load

cfg = load(Path(__file__).parent / "configs" / "sqrt2.cfg")
run = horocycle_run(cfg)
print(compare_report(run))
print("target (3/(2 pi))^2 =", (3 / (2 * math.pi)) ** 2)
