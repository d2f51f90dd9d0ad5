import itertools
from dataclasses import replace
from pathlib import Path

import pytest

from ttpshare.adversary import (
    AdversaryKind,
    AdversaryModel,
    CustodyRole,
    Refusal,
    Role,
    ScenarioConfig,
    brute_force_candidates,
    builtin_config,
    device_access,
    factor_attack,
    factor_semiprime,
    parse_config,
    partition_view,
    run_scenario,
    setup_custody,
)
from ttpshare.dual_ttp import DEALER, TTP1
from ttpshare.errors import ConfigError, EnumerationTooLarge
from ttpshare.field import PrimeContext
from ttpshare.partition import Partition, recover_secret, reconstruct_roots, split_secret
from ttpshare.piggy import generate_keypair
from ttpshare.rng import SplitMix64
from ttpshare.transcript import Message

GOLDEN = Path(__file__).parent / "golden"
P19 = PrimeContext(19)
FULL = set(range(1, 19))
CFG = ScenarioConfig()


def test_oracle_single_partition_example():
    got = brute_force_candidates(partition_view([Partition(1, 1, (11,))]), CFG)
    assert 12 in got and len(got) >= 9


def test_oracle_two_partitions_collapse():
    shares = split_secret(12, 2, 3, P19, SplitMix64(42))
    for a, b in itertools.combinations(shares.partitions, 2):
        assert brute_force_candidates(partition_view([a, b]), CFG) == {12}


def test_oracle_ttp1_packages_only():
    report = run_scenario(builtin_config("compromised_ttp1", 42))
    assert {m.kind for m in report.adversary_view} == {"SHARE_PKG1", "DELIVER1"}
    assert brute_force_candidates(report.adversary_view, CFG) == FULL


def test_oracle_empty_view_is_full_field():
    assert brute_force_candidates([], CFG) == FULL


def test_oracle_single_share_matches_root_enumeration():
    # independent count: secrets r1*r2 with r1 + r2*x = c
    for x, c in itertools.product(range(1, 4), range(19)):
        want = {r1 * r2 % 19 for r1 in range(1, 19) for r2 in range(1, 19) if (r1 + r2 * x) % 19 == c}
        assert brute_force_candidates(partition_view([Partition(x, x, (c,))]), CFG) == want


def test_oracle_both_packages_for_one_recipient_equal_partition():
    # TTP1 plus TTP2 material for a single recipient is worth exactly one share
    report = run_scenario(builtin_config("honest", 9))
    view = [m for m in report.transcript if m.kind in ("DELIVER1", "DELIVER2") and m.get("i") == 1]
    d1, d2 = (m.as_dict() for m in view)
    c = (d1["enc"][0] - (d2["enckey"][0] - d1["wrap"][0])) % 19
    part = Partition(1, d1["x"], (c,))
    assert brute_force_candidates(view, CFG) == brute_force_candidates(partition_view([part]), CFG)


def test_enumeration_guard():
    big = replace(CFG, p=(1 << 20) + 7)
    with pytest.raises(EnumerationTooLarge):
        brute_force_candidates([], big)
    with pytest.raises(EnumerationTooLarge):
        brute_force_candidates([], replace(CFG, p=1009, k=4))


def test_honest_scenario_golden():
    report = run_scenario(builtin_config("honest", 42))
    assert report.delivered == (True, True, True)
    assert report.reconstructed_secret == (12,)
    assert report.candidate_secrets == FULL
    assert not report.tamper_detected
    assert report.render() == (GOLDEN / "scenario_honest_seed42.log").read_text()


def test_compromised_ttp2_example():
    report = run_scenario(builtin_config("compromised_ttp2", 42))
    assert not report.tamper_detected
    assert report.candidate_secrets == FULL
    assert report.render() == (GOLDEN / "scenario_compromised_ttp2_seed42.log").read_text()


@pytest.mark.parametrize("name", ["compromised_ttp1", "compromised_ttp2"])
def test_single_compromise_sweep(name):
    for seed in range(100):
        report = run_scenario(builtin_config(name, seed))
        assert report.candidate_secrets == FULL, seed
        assert report.contains_true
        assert report.reconstructed_secret == (12,)


def test_compromised_ttp_varied_secrets():
    for d in (1, 5, 18):
        cfg = replace(CFG, secret=(d,), adversary=AdversaryModel(AdversaryKind.COMPROMISED_TTP1))
        report = run_scenario(cfg)
        assert report.candidate_secrets == FULL and report.reconstructed_secret == (d,)


@pytest.mark.parametrize("k,n", [(2, 3), (3, 4)])
def test_quorum_law(k, n):
    cfg = replace(CFG, k=k, n=n)
    for seed, d in ((1, 12), (2, 7), (3, 18)):
        shares = split_secret(d, k, n, P19, SplitMix64(seed))
        for size in range(n + 1):
            for subset in itertools.combinations(shares.partitions, size):
                got = brute_force_candidates(partition_view(subset), cfg)
                assert d in got
                assert (len(got) == 1) == (size >= k), (seed, size)


def test_mim_piggy_golden():
    report = run_scenario(builtin_config("mim_piggy", 42))
    assert report.tamper_detected
    assert report.delivered == (False, False, False)
    assert report.reconstructed_secret is None
    assert report.render() == (GOLDEN / "scenario_mim_piggy_seed42.log").read_text()


def test_mim_m1_random_detected_every_trial():
    model = AdversaryModel.parse("mim:dealer-ttp1:m1=random")
    cfg = replace(CFG, transport="piggy", adversary=model)
    assert all(run_scenario(replace(cfg, seed=s)).tamper_detected for s in range(300))


def test_mim_m2_random_detection_32bit():
    model = AdversaryModel.parse("mim:dealer-ttp2:m2=random")
    rng = SplitMix64(77)
    hits = 0
    for seed in range(200):
        cfg = replace(CFG, transport="piggy", adversary=model, seed=seed,
                      pb_key=generate_keypair(32, rng))
        hits += run_scenario(cfg).tamper_detected
    assert hits >= 198


def test_mim_on_direct_transport_corrupts_silently():
    # without the piggy layer nothing checks integrity; recovery yields a wrong value
    cfg = replace(CFG, adversary=AdversaryModel.parse("mim:dealer-ttp1:enc+1"))
    report = run_scenario(cfg)
    assert not report.tamper_detected
    assert report.reconstructed_secret != (12,)


def test_eavesdrop_direct_link():
    cfg = replace(CFG, adversary=AdversaryModel.parse("eavesdrop:dealer-ttp1"))
    report = run_scenario(cfg)
    assert [m.kind for m in report.adversary_view] == ["SHARE_PKG1"] * 3
    assert report.candidate_secrets == FULL


def test_eavesdrop_piggy_sees_only_sealed_traffic():
    cfg = replace(CFG, transport="piggy", adversary=AdversaryModel.parse("eavesdrop:dealer-ttp1"))
    report = run_scenario(cfg)
    kinds = {m.kind for m in report.adversary_view}
    assert kinds == {"PB_CHALLENGE", "PB_RESP1", "PB_RESP2"}
    assert report.candidate_secrets == FULL
    # given the factors the sealed values open to the package fields (shifted by one)
    opened = factor_attack(report.adversary_view, 5, 17, 5)
    pkgs = report.transcript.of_kind("SHARE_PKG1")
    flat = [v + 1 for m in pkgs for v in (m.get("i"), m.get("x"), *m.get("enc"), *m.get("wrap"))]
    assert opened == flat


def test_factor_attack_recovers_s():
    m = Message(1, DEALER, TTP1, "PB_RESP2", (("round", 0), ("m2", 41)))
    assert factor_attack([m], 5, 17, 5) == [6]


def test_adversary_parse():
    assert AdversaryModel.parse("none") == AdversaryModel()
    mim = AdversaryModel.parse("mim:dealer-ttp1:m1+1")
    assert mim.link == (DEALER, TTP1) and mim.rule == "m1+1"
    assert str(mim) == "mim:dealer-ttp1:m1+1"
    assert str(AdversaryModel.parse("eavesdrop:ttp2-r3")) == "eavesdrop:ttp2-r3"
    for bad in ("nobody", "mim:dealer-ttp1", "mim:dealer-ttp1:m1*2", "mim:dealer-ttp1:m1+0",
                "eavesdrop:dealer", "compromised_ttp1:x"):
        with pytest.raises(ConfigError):
            AdversaryModel.parse(bad)


def test_topology_check():
    AdversaryModel.parse("eavesdrop:ttp1-r3").check_topology(3)
    for link in ("eavesdrop:ttp1-r4", "eavesdrop:ttp1-ttp2", "eavesdrop:dealer-r1"):
        with pytest.raises(ConfigError):
            AdversaryModel.parse(link).check_topology(3)


def test_parse_config_round_trip():
    cfg = replace(CFG, secret=(3, 4), transport="piggy",
                  adversary=AdversaryModel.parse("mim:dealer-ttp1:m2=random"))
    assert parse_config(cfg.render()) == cfg
    text = "# comment\np=23\nk=3 # inline\nn=4\nsecret=5\n"
    assert parse_config(text) == ScenarioConfig(p=23, k=3, n=4, secret=(5,))


@pytest.mark.parametrize("text", ["p=19\np=19\n", "q=1\n", "p\n", "p=abc\n", "transport=smoke\n"])
def test_parse_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_factor_semiprime():
    assert factor_semiprime(85) == (5, 17)
    with pytest.raises(ConfigError):
        factor_semiprime(97)
    with pytest.raises(ConfigError):
        factor_semiprime(1 << 41)


def test_device_access_examples():
    roles, _ = setup_custody([12], P19, 42)
    le, ju, ve = roles
    assert [r.name for r in roles] == list(Role)
    assert device_access([le, ju], P19) == (12,)
    assert device_access(roles, P19) == (12,)
    refusal = device_access([le], P19)
    assert isinstance(refusal, Refusal)
    assert refusal.missing == (Role.JUDICIARY, Role.VENDOR)
    assert "need 2 of 3" in str(refusal)


def test_device_access_agrees_with_reconstruction_for_all_subsets():
    for seed in range(20):
        d = seed % 18 + 1
        roles, _ = setup_custody([d], P19, seed)
        for size in range(4):
            for subset in itertools.combinations(roles, size):
                got = device_access(subset, P19)
                if size < 2:
                    assert isinstance(got, Refusal) and got.have == size
                else:
                    parts = [r.holds for r in subset[:2]]
                    assert got == (recover_secret(reconstruct_roots(parts, 2, P19)),) == (d,)


def test_device_access_absent_holdings_count_as_missing():
    roles, _ = setup_custody([7], P19, 1)
    holders = [roles[0], CustodyRole(Role.JUDICIARY), roles[2]]
    assert device_access(holders, P19) == (7,)
    assert isinstance(device_access(holders[:2], P19), Refusal)
