"""Regenerates include/vsc/detail/colormap_tables.inc from matplotlib's listed maps."""
import pathlib

import matplotlib._cm_listed as listed

OUT = pathlib.Path(__file__).resolve().parent.parent / "include/vsc/detail/colormap_tables.inc"


def table(name, data):
    rows = ",\n".join(f"    {{{r:.6f}, {g:.6f}, {b:.6f}}}" for r, g, b in data)
    return f"inline constexpr std::array<std::array<double, 3>, 256> k{name}Table = {{{{\n{rows}}}}};\n"


OUT.write_text(
    "// Generated by tools/gen_colormaps.py. Do not edit.\n"
    "// Values are the published 256-entry viridis and magma tables.\n\n"
    + table("Viridis", listed._viridis_data)
    + "\n"
    + table("Magma", listed._magma_data)
)
