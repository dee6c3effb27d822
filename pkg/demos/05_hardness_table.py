"""Spectral hardness table for all reference instances.

The hardness parameter combines the ground degeneracy, the gap to the first
excited subspace, and a gap-suppressed sum over threatening subspaces:
HP = Sigma / (|E0| * D_opt * G^2). Instances whose degeneracy depends on
penalty defaults are flagged rather than presented as pinned values.
"""

from rydqubo import PRESET_NAMES, format_table, preset_instance, report_rows

named = []
for name in PRESET_NAMES:
    preset = preset_instance(name)
    note = ("" if preset.metadata["degeneracy_pinned"]
            else "degeneracy depends on unpinned penalty defaults")
    named.append((name, preset.model, note))

print(format_table(report_rows(named)))
