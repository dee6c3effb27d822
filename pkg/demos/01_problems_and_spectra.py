"""Build each reference problem instance and inspect its exact spectrum.

Every problem family compiles to a quadratic binary model; enumerating all
assignments (feasible for these small instances) gives the exact ground
energy, its degeneracy, and the full cost histogram.
"""

from rydqubo import PRESET_NAMES, enumerate_spectrum, preset_instance, state_bits

for name in PRESET_NAMES:
    preset = preset_instance(name)
    table = enumerate_spectrum(preset.model)
    ground = table.entries[0]
    print(f"\n{name}: {preset.metadata['description']}")
    print(f"  variables: {preset.model.n}")
    print(f"  spectrum:  " + ", ".join(
        f"{e.energy:g} (x{e.multiplicity})" for e in table.entries[:6])
        + (" ..." if len(table.entries) > 6 else ""))
    bits = [''.join(map(str, state_bits(s, preset.model.n)))
            for s in ground.states[:4]]
    print(f"  optimum {ground.energy:g} with degeneracy {ground.multiplicity}; "
          f"e.g. {' '.join(bits)}")
