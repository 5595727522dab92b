"""The bundled fixture must stay bit-identical to what the generator
produces, or the manifest stops being a trustworthy oracle."""

from pathlib import Path

import fixturegen


def test_bundled_fixture_matches_generator(tmp_path, fixture_dir):
    fixturegen.generate(out_dir=tmp_path)
    regenerated = sorted(p for p in tmp_path.rglob("*") if p.is_file())
    bundled = sorted(p for p in Path(fixture_dir).rglob("*") if p.is_file())
    assert [p.relative_to(tmp_path) for p in regenerated] == [
        p.relative_to(fixture_dir) for p in bundled
    ]
    for fresh, shipped in zip(regenerated, bundled):
        assert fresh.read_bytes() == shipped.read_bytes(), shipped.name
