"""Regenerates include/vsc/detail/font_6x11.inc from Pillow's built-in bitmap font.

Each glyph is 11 rows of 6 pixels; bit 5 of a row byte is the leftmost pixel.
"""
import pathlib

import numpy as np
from PIL import Image, ImageDraw, ImageFont

OUT = pathlib.Path(__file__).resolve().parent.parent / "include/vsc/detail/font_6x11.inc"
W, H = 6, 11

font = ImageFont.load_default_imagefont()
glyphs = []
for code in range(32, 127):
    im = Image.new("L", (W, H), 0)
    ImageDraw.Draw(im).text((0, 0), chr(code), font=font, fill=255)
    a = np.array(im) > 127
    rows = [sum(1 << (W - 1 - x) for x in range(W) if a[y, x]) for y in range(H)]
    glyphs.append("    {" + ", ".join(f"0x{r:02x}" for r in rows) + f"}},  // '{chr(code) if code != 92 else 'backslash'}'")

OUT.write_text(
    "// Generated by tools/gen_font.py. Do not edit.\n"
    f"inline constexpr int kGlyphWidth = {W};\n"
    f"inline constexpr int kGlyphHeight = {H};\n"
    "inline constexpr char kFirstGlyph = ' ';\n"
    "inline constexpr std::array<std::array<std::uint8_t, 11>, 95> kGlyphs = {{\n"
    + "\n".join(glyphs)
    + "\n}};\n"
)
