# Irregularity Profiler - Package
# Irregularity profiling of sequential datasets (IQR fences + IPPD peaks)

__version__ = "1.0.0"
__author__ = "QA Engineering Team"
__description__ = "Irregularity profiling, dataset ranking and prediction scoring for sequential data"
