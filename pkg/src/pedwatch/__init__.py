"""Detection-log analytics for curbside traffic cameras.

Turns per-frame object detections into bus-stop dwell sessions and
road-crossing events, hourly statistics with outlier filtering, Pearson
correlation tables, clip cut-lists, and an authenticated review service.
"""

__version__ = "0.1.0"
