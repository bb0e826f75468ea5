"""
Scoring a labelled corpus: frame accuracy, confusion, debounced events
======================================================================

synth_corpus generates a labelled stream for every registry gesture; evaluate
scores each frame independently and renders the benchmark-style table (accuracy
and error truncated to two decimals, recall rounded).
"""

from handwave import (
    SynthSpec,
    default_registry,
    evaluate,
    evaluate_events,
    format_report_table,
    synth_corpus,
)

registry = default_registry()

# Noise-free frames classify perfectly...
clean = SynthSpec.from_registry(registry, frames_per_gesture=50, jitter_sigma=0.0)
report = evaluate(synth_corpus(clean), registry)
print(f"sigma=0.00: overall accuracy {report.totals.accuracy_pct:.2f}%")

# ...while coordinate jitter starts flipping finger bits.
noisy = SynthSpec.from_registry(registry, frames_per_gesture=50,
                                jitter_sigma=0.02, seed=3)
pairs = synth_corpus(noisy)
report = evaluate(pairs, registry)
print(f"sigma=0.02: overall accuracy {report.totals.accuracy_pct:.2f}%\n")

print(format_report_table(report))

# Off-diagonal confusion counts say where the errors went.
worst = max(report.rows, key=lambda r: r.false_frames)
row = report.confusion[report.labels.index(worst.name)]
spilled = {report.columns[i]: int(c) for i, c in enumerate(row)
           if c and report.columns[i] != worst.name}
print(f"\nmost-confused gesture: {worst.name} -> {spilled}")

# The event view asks a different question: was each labelled run of frames
# detected as one debounced onset?
events = evaluate_events(pairs, registry)
totals = events["totals"]
print(f"\nevents: {totals['detected']}/{totals['expected']} runs detected, "
      f"{totals['spurious']} spurious onsets")
