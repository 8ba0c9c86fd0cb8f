"""effgcn - EfficientGCN skeleton action recognition at desk scale."""

import os

__version__ = "0.1.0"

# Cap BLAS parallelism before numpy is first imported.
_threads = os.environ.get("EFFGCN_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)
