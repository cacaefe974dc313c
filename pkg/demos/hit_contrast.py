"""Certified hit counts for mu-random points under a divergent and a convergent psi.

Run: python3 demos/hit_contrast.py [samples] [n_max]
"""
import sys

import numpy as np

from dyadcantor.experiments import PsiSpec, sample_hits

samples = int(sys.argv[1]) if len(sys.argv) > 1 else 10
n_max = int(sys.argv[2]) if len(sys.argv) > 2 else 2000

for base, text in ((2, "thm_divergence"), (2, "power:log3/log2"), (3, "power:log3/log2")):
    rows = sample_hits(0, samples, base, PsiSpec.parse(text), n_max)
    hits = np.array([r.hits for r in rows])
    unc = sum(r.uncertain for r in rows)
    print(f"base {base}, psi {text:16s}: mean hits {hits.mean():8.2f}, range {hits.min()}..{hits.max()}, uncertain {unc}")
