"""Weighted dyadic reciprocity on directed communication graphs."""

from ._dyadrec import (
    Graph,
    IntegrityError,
    IoError,
    UndefinedCorrelation,
    ValidationError,
    __version__,
    analyze,
    assortativity,
    census,
    classify,
    compare_regimes,
    concentration,
    concentration_of,
    equidispersion_prediction,
    equidisperse,
    four_regimes,
    ingest,
    load_snapshot,
    mean_h_star,
    reciprocity,
    reciprocity_from_weights,
    reciprocity_records,
    rewire,
    save_snapshot,
    synth,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
