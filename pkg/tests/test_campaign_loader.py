from pathlib import Path

import pytest

from src.campaign_loader import CampaignError, CodeSource, campaign_summary, load_campaign


BASE = """
version: 1
modulation: qam16
ebn0: {start: 8.0, stop: 12.0, step: 0.5}
max_frames: 5000
min_frame_errors: 50
seed: 9
"""


def write_campaign(tmp_path, systems, base=BASE):
    path = tmp_path / "campaign.yaml"
    path.write_text(base + systems, encoding="utf-8")
    return path


CAMPAIGNS_DIR = Path(__file__).resolve().parents[1] / "campaigns"


@pytest.mark.parametrize(
    "name, modulation, field, dc",
    [
        ("gf64_dc6_qam64.yaml", "qam64", 64, 6),
        ("gf64_dc12_qam64.yaml", "qam64", 64, 12),
        ("gf256_dc6_qam256.yaml", "qam256", 256, 6),
        ("gf256_dc12_qam256.yaml", "qam256", 256, 12),
    ],
)
def test_shipped_campaigns_load(name, modulation, field, dc):
    campaign = load_campaign(CAMPAIGNS_DIR / name)
    assert 8.0 <= campaign.ebn0_start < campaign.ebn0_stop <= 18.0
    assert campaign.version == 1
    assert campaign.modulation == modulation
    assert [system.name for system in campaign.systems] == ["none", "random", "peg"]
    kinds = [system.interleaver.kind for system in campaign.systems]
    assert kinds == ["identity", "random", "peg"]
    codes = {system.code for system in campaign.systems}
    assert len(codes) == 1
    code = codes.pop()
    assert (code.field, code.dc) == (field, dc)


def test_campaign_defaults_and_sources(tmp_path):
    path = write_campaign(
        tmp_path,
        """
systems:
  - name: file-code
    code: codes/gf16.txt
    interleaver: patterns/peg.txt
  - name: built
    code: {field: 16, n_symbols: 24, dc: 6}
    interleaver: {kind: peg, seed: 3, local_scramble: on, order: random}
""",
    )
    campaign = load_campaign(path)
    assert campaign.max_iters == 100
    assert campaign.workers == 1
    assert campaign.ebn0_step == 0.5
    first, second = campaign.systems
    assert first.code == CodeSource(path="codes/gf16.txt")
    assert (first.interleaver.kind, first.interleaver.path) == ("file", "patterns/peg.txt")
    assert second.code.n_symbols == 24 and second.code.dv == 2 and second.code.min_girth == 6
    assert second.interleaver.local_scramble is True
    assert second.interleaver.order == "random"
    assert campaign_summary(campaign)["systems"] == ["file-code", "built"]


@pytest.mark.parametrize(
    "systems",
    [
        "systems: []\n",
        "systems:\n  - name: a\n    code: {field: 32}\n",
        "systems:\n  - name: a\n    code: {field: 16, colour: red}\n",
        "systems:\n  - name: a b\n    code: c.txt\n",
        "systems:\n  - name: a\n    code: c.txt\n  - name: a\n    code: c.txt\n",
        "systems:\n  - name: a\n    code: c.txt\n    interleaver: {kind: spiral}\n",
        "systems:\n  - name: a\n    code: 12\n",
    ],
)
def test_bad_systems_raise(tmp_path, systems):
    with pytest.raises(CampaignError):
        load_campaign(write_campaign(tmp_path, systems))


@pytest.mark.parametrize(
    "base",
    [
        "- just a list\n",
        "version: one\nmodulation: qam16\nebn0: {start: 1}\n",
        "version: 1\nmodulation: qam32\nebn0: {start: 1}\n",
        "version: 1\nmodulation: qam16\nebn0: 5\n",
        "version: 1\nmodulation: qam16\nebn0: {start: 5, stop: 1}\n",
        "version: 1\nmodulation: qam16\nebn0: {start: 1, step: 0}\n",
        "version: 1\nmodulation: qam16\nebn0: {start: 1}\nmax_frames: 0\n",
        "version: 1\nmodulation: qam16\nebn0: {start: 1}\nworkers: [2]\n",
        "version: 1\nmodulation: [unclosed\n",
    ],
)
def test_bad_campaign_settings_raise(tmp_path, base):
    with pytest.raises(CampaignError):
        load_campaign(write_campaign(tmp_path, "", base=base))
