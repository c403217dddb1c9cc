"""Tour of the conductor-layout machinery and the two built-in designs.

Builds the published simple and modified U-patch layouts, checks their
exact areas against the rectangle tables, rasterizes them at a few
resolutions, and writes PGM bitmaps you can open in any image viewer.
"""

from pathlib import Path

from patchsim import (
    build_modified_u_patch,
    build_simple_u_patch,
    conductor_mask,
    layout_area,
    write_pgm,
)

out = Path("demo_out/geometry")
out.mkdir(parents=True, exist_ok=True)

simple = build_simple_u_patch()
modified = build_modified_u_patch()

print("simple U-patch:")
print(f"  rectangles: {len(simple.layout.rects)} "
      f"(1 patch + 1 feed + 3 slot cuts)")
print(f"  exact conductor area: {layout_area(simple.layout) * 1e6:.3f} mm^2")
print(f"  bounding box: {[f'{v * 1e3:.2f} mm' for v in simple.layout.bounding_box()]}")

print("modified U-patch (seven edge notches):")
print(f"  rectangles: {len(modified.layout.rects)}")
print(f"  exact conductor area: {layout_area(modified.layout) * 1e6:.3f} mm^2")
removed = layout_area(simple.layout) - layout_area(modified.layout)
print(f"  area removed by the notches: {removed * 1e6:.2f} mm^2 "
      f"(= 4 mm x sum of the seven widths)")

for name, design in (("simple_u", simple), ("modified_u", modified)):
    for res_mm in (0.5, 0.25, 0.1):
        mask = conductor_mask(design.layout, res_mm * 1e-3)
        err = abs(mask.area() - layout_area(design.layout)) / layout_area(design.layout)
        flag = " (under-resolved!)" if mask.under_resolved else ""
        print(f"  {name} @ {res_mm} mm: {mask.values.shape[0]}x{mask.values.shape[1]} "
              f"cells, area error {err * 100:.2f}%{flag}")
        if res_mm == 0.1:
            path = out / f"{name}.pgm"
            write_pgm(mask, path)
            print(f"  wrote {path}")
