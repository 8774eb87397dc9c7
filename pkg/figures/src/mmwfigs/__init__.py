"""Batch figures for mmwsched campaign CSVs."""

from .figures import (FigureError, FigureSpec, improvement_series, load_rows,
                      render, series_table)

__version__ = "0.1.0"
