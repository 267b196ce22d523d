"""Shared fixtures: the paper-geometry mesh context and per-wavenumber
assemblies are expensive, so they are session-scoped and reused."""

import numpy as np
import pytest

from fembem import bem, experiments, fem, geometry

KAPPA_RES_1 = 4.326863956455512   # j_{0,3} / 2
KAPPA_RES_2 = 4.385741907979977   # j_{5,1} / 2
KAPPA_OFF = 4.30


@pytest.fixture(scope="session")
def paper_ctx():
    """Annulus mesh and FEM system at the fixed experiment resolution."""
    return experiments.build_mesh_context(10.0, 20.0)


@pytest.fixture(scope="session")
def iface400(paper_ctx):
    return paper_ctx.interface


@pytest.fixture(scope="session")
def bios_off(iface400):
    return bem.assemble_bios(iface400, KAPPA_OFF)


@pytest.fixture(scope="session")
def yukawa_off(iface400):
    return bem.assemble_yukawa_hypersingular(iface400, KAPPA_OFF)


@pytest.fixture(scope="session")
def bios_res1(iface400):
    return bem.assemble_bios(iface400, KAPPA_RES_1)


@pytest.fixture(scope="session")
def yukawa_res1(iface400):
    return bem.assemble_yukawa_hypersingular(iface400, KAPPA_RES_1)


@pytest.fixture(scope="session")
def bios_res2(iface400):
    return bem.assemble_bios(iface400, KAPPA_RES_2)


@pytest.fixture(scope="session")
def yukawa_res2(iface400):
    return bem.assemble_yukawa_hypersingular(iface400, KAPPA_RES_2)


@pytest.fixture(scope="session")
def schur_off(paper_ctx):
    return fem.schur_transmission(paper_ctx.fem_sys, KAPPA_OFF)


@pytest.fixture(scope="session")
def coarse_iface():
    return geometry.circle_interface(2.0, 60)
