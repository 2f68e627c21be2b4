"""
验证服务测试
"""

import pytest

from src.core.transform import reset_euler_sign
from src.services.verification_service import VerificationService
from src.utils.exceptions import UnhandledComputationError, UnknownBatteryError

FAST_BATTERIES = [
    "cone-lattice",
    "no-real-points",
    "kernel-series",
    "fiber-identities",
    "schur",
    "operator-eigenvalue",
]


@pytest.fixture(autouse=True)
def fresh_euler_sign():
    reset_euler_sign()
    yield
    reset_euler_sign()


@pytest.fixture
def service(reduced_spec):
    return VerificationService(spec=reduced_spec)


class TestRegistry:

    def test_available(self, service):
        assert service.available[-1] == "all"
        assert set(FAST_BATTERIES) < set(service.available)
        assert "inversion" in service.available
        assert "quadrature-convergence" in service.available

    def test_unknown_battery(self, service):
        with pytest.raises(UnknownBatteryError) as info:
            service.run("no-such-battery")
        assert "cone-lattice" in info.value.context["available"]

    def test_foreign_error_in_battery_is_wrapped(self, service):
        def broken(rng):
            raise ZeroDivisionError("除零")

        service.batteries["broken"] = broken
        with pytest.raises(UnhandledComputationError) as info:
            service.run("broken", seed=1)
        assert info.value.error_code == "UNHANDLED_ERROR"
        assert info.value.context["operation"] == "verify"
        assert info.value.context["original_error"] == "ZeroDivisionError"

    def test_lattice_data(self, service):
        names = [datum.name for datum in service.lattice_data()]
        assert names == ["group_case", "rank1_m3", "sl2", "su21", "rank1_m1", "rank1_m2"]


class TestBatteries:

    @pytest.mark.parametrize("battery", FAST_BATTERIES)
    def test_battery_passes(self, service, battery):
        (report,) = service.run(battery, seed=20240601)
        assert report.battery == battery
        assert report.checks
        assert report.failed_checks() == []

    @pytest.mark.parametrize("seed", [20240601, 1, 7])
    def test_measure_invariance_at_default_resolution(self, seed):
        service = VerificationService()
        assert service.config.sampling.boost_range == 2.0
        (report,) = service.run("measure-invariance", seed=seed)
        assert len(report.checks) == service.config.verification.group_words
        assert report.failed_checks() == []

    def test_fiber_identities_on_both_branches(self, service):
        (report,) = service.run("fiber-identities", seed=3)
        assert report.failed_checks() == []

    def test_same_seed_same_observations(self, service):
        first = service.run("kernel-series", seed=7)[0]
        second = service.run("kernel-series", seed=7)[0]
        assert [c.observed for c in first.checks] == [c.observed for c in second.checks]

    def test_different_seed_different_samples(self, service):
        first = service.run("no-real-points", seed=1)[0]
        second = service.run("no-real-points", seed=2)[0]
        assert first.checks[1].observed != second.checks[1].observed


@pytest.mark.slow
class TestSlowBatteries:

    @pytest.mark.parametrize("battery", ["inversion", "quadrature-convergence"])
    def test_reduced_resolution(self, service, battery):
        (report,) = service.run(battery, seed=20240601)
        assert report.failed_checks() == []

    def test_all_at_default_resolution(self):
        reports = VerificationService().run("all")
        assert [r.battery for r in reports] == list(VerificationService().batteries)
        assert all(report.passed for report in reports)
