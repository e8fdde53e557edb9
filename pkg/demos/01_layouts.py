"""Kitchens are plain text: parse one, validate it, round-trip it.

Run: python demos/01_layouts.py
"""

from manycooks.layout import (
    builtin_layout,
    builtin_layout_names,
    check_reachability,
    parse_layout,
    render_layout,
)

print("layouts shipped with the package:")
for name in builtin_layout_names():
    layout = builtin_layout(name)
    print(f"  {name}: {layout.width}x{layout.height}, {layout.num_agents} seats")

print()
print("a custom 5x5 kitchen (X counter, P pot, O onions, D dishes, S serving):")
text = "XXPXX\nO1 2S\nX   X\nXXDXX\nXXXXX"
layout = parse_layout(text, name="demo")
print(text)
print(f"parsed: {layout.num_agents} seats starting at {layout.start_positions}")

assert render_layout(layout) == text
print("render(parse(text)) round-trips exactly")

findings = check_reachability(layout)
print(f"reachability findings: {findings or 'none, every station is workable'}")

print()
print("an enclosed pot is reported, not rejected:")
broken = "XXXXXXX\nX1 2  X\nX XXX X\nO XPX S\nX XXX X\nX  D  X\nXXXXXXX"
for finding in check_reachability(parse_layout(broken, name="walled-pot")):
    print(f"  {finding}")
