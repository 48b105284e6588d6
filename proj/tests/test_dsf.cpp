#include <gtest/gtest.h>

#include <random>

#include "dsfmin/dsf.hpp"
#include "dsfmin/minreal.hpp"
#include "test_systems.hpp"

using namespace dsfmin;
using dsfmin::fixtures::lag;

namespace {

Matrix limit_of_r(const PartitionedRealization& part) {
    const WV wv = compute_wv(part);
    RationalMatrix r(part.p(), 1);
    for (Index i = 0; i < part.p(); ++i) r.set(i, 0, wv.W(i, i));
    return limit_at_infinity(r);
}

void expect_structure_limits_hold(const PartitionedRealization& part, const Dsf& d) {
    const StructureLimits lim = structure_limits(d);
    Matrix off = part.A11;
    off.diagonal().setZero();
    EXPECT_LT((lim.A11_offdiag - off).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((lim.B1 - part.B1).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((limit_of_r(part).col(0) - part.A11.diagonal()).cwiseAbs().maxCoeff(), 1e-8);
}

}  // namespace

TEST(ComputeDsf, Example1ClosedForm) {
    const Dsf d = compute_dsf(fixtures::example1_partition());
    const Dsf expected = fixtures::example1_closed_form();
    EXPECT_TRUE(rmat_equal(d.Q(), expected.Q(), 1e-9));
    EXPECT_TRUE(rmat_equal(d.P(), expected.P(), 1e-9));
}

TEST(ComputeDsf, NoHiddenStatesDiagonal) {
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << -1.0, -3.0;
    const Matrix b = Matrix::Identity(2, 2);
    const Dsf d = compute_dsf(PartitionedRealization::from_blocks(a, b, 2));
    EXPECT_TRUE(rmat_equal(d.Q(), RationalMatrix(2, 2)));
    RationalMatrix p(2, 2);
    p.set(0, 0, lag(-1.0));
    p.set(1, 1, lag(-3.0));
    EXPECT_TRUE(rmat_equal(d.P(), p));
}

TEST(ComputeDsf, DiagonalOfQIsZeroAndEntriesStrictlyProper) {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 30; ++trial) {
        const Dsf d = compute_dsf(fixtures::random_symmetric_partition(rng, 1 + trial % 4, trial % 4, 1 + trial % 3));
        for (Index i = 0; i < d.p(); ++i) {
            EXPECT_TRUE(d.Q()(i, i).is_zero());
            for (Index j = 0; j < d.p(); ++j) EXPECT_NE(d.Q()(i, j).properness(), Properness::Biproper);
            for (Index j = 0; j < d.m(); ++j) EXPECT_EQ(d.P()(i, j).properness(), Properness::StrictlyProper);
        }
    }
}

TEST(StructureLimits, RandomThreeByThree) {
    std::mt19937 rng(33);
    const PartitionedRealization part = fixtures::random_symmetric_partition(rng, 3, 3, 2);
    expect_structure_limits_hold(part, compute_dsf(part));
}

// The structure at infinity recovers A11 and B1 for every partitioned system.
TEST(StructureLimits, HoldForRandomSystems) {
    std::mt19937 rng(34);
    for (int trial = 0; trial < 60; ++trial) {
        const PartitionedRealization part =
            fixtures::random_symmetric_partition(rng, 1 + trial % 4, (trial / 4) % 5, 1 + trial % 3);
        SCOPED_TRACE(trial);
        expect_structure_limits_hold(part, compute_dsf(part));
    }
}

TEST(StructureLimits, Example1) {
    const StructureLimits lim = structure_limits(compute_dsf(fixtures::example1_partition()));
    Matrix off = Matrix::Zero(3, 3);
    off(0, 2) = off(2, 1) = 1.0;
    Matrix b1 = Matrix::Zero(3, 2);
    b1(0, 0) = b1(1, 1) = 1.0;
    EXPECT_LT((lim.A11_offdiag - off).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((lim.B1 - b1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(StructureLimits, ZeroQOnesP) {
    RationalMatrix p(3, 1);
    for (Index i = 0; i < 3; ++i) p.set(i, 0, lag(-4.0));
    const StructureLimits lim = structure_limits(Dsf::make(RationalMatrix(3, 3), p));
    EXPECT_TRUE(lim.A11_offdiag.isZero(0.0));
    EXPECT_LT((lim.B1 - Matrix::Ones(3, 1)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DsfToTransfer, ZeroQGivesP) {
    RationalMatrix p(2, 1);
    p.set(0, 0, lag(-1.0));
    p.set(1, 0, lag(-2.0, 3.0));
    const Dsf d = Dsf::make(RationalMatrix(2, 2), p);
    EXPECT_TRUE(rmat_equal(dsf_to_transfer(d), p));
}

TEST(DsfToTransfer, Example2DegreeFour) { EXPECT_EQ(mcmillan_degree(dsf_to_transfer(fixtures::example2_dsf())), 4); }

// Composing (I - Q)^{-1} P undoes the partition: same G as the full system.
TEST(DsfToTransfer, MatchesAssembledSystem) {
    std::mt19937 rng(71);
    for (int trial = 0; trial < 40; ++trial) {
        const PartitionedRealization part =
            fixtures::random_symmetric_partition(rng, 1 + trial % 4, (trial / 4) % 5, 1 + trial % 3);
        const Dsf d = compute_dsf(part);
        EXPECT_TRUE(rmat_equal(dsf_to_transfer(d), transfer_function(part.assemble()), 1e-7)) << "trial " << trial;
    }
}

TEST(BooleanStructure, Example2AllTrue) {
    const BooleanStructure bs = boolean_structure(fixtures::example2_dsf());
    for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) EXPECT_EQ(bs.q_adj(i, j), i != j);
        EXPECT_TRUE(bs.p_adj(i, 0));
    }
}

TEST(BooleanStructure, Example1Pattern) {
    const BooleanStructure bs = boolean_structure(compute_dsf(fixtures::example1_partition()));
    Eigen::Matrix<bool, 3, 3> q;
    q << false, false, true, true, false, false, false, true, false;
    Eigen::Matrix<bool, 3, 2> p;
    p << true, false, false, true, false, false;
    EXPECT_EQ(bs.q_adj, q);
    EXPECT_EQ(bs.p_adj, p);
}

TEST(BooleanStructure, ZeroQ) {
    RationalMatrix p(2, 1);
    p.set(0, 0, lag(-1.0));
    p.set(1, 0, lag(-2.0));
    EXPECT_FALSE(boolean_structure(Dsf::make(RationalMatrix(2, 2), p)).q_adj.any());
}

// With no hidden states every Q entry has relative degree one, so the
// adjacency is exactly the pattern of the limit s Q.
TEST(BooleanStructure, MatchesLimitPatternForRelativeDegreeOne) {
    std::mt19937 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Index p = 2 + trial % 3;
        Matrix a = fixtures::random_matrix(rng, p, p);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j)
                if (i != j && (i + j + trial) % 3 == 0) a(i, j) = 0.0;
        a.diagonal() = -Vector::LinSpaced(p, 1.0, static_cast<double>(p));
        const Dsf d = compute_dsf(PartitionedRealization::from_blocks(a, fixtures::random_matrix(rng, p, 1), p));
        const BooleanStructure bs = boolean_structure(d);
        const StructureLimits lim = structure_limits(d);
        for (Index i = 0; i < p; ++i)
            for (Index j = 0; j < p; ++j) EXPECT_EQ(bs.q_adj(i, j), std::abs(lim.A11_offdiag(i, j)) > 1e-12);
    }
}

TEST(ConsistencyCheck, OwnDsfIsConsistent) {
    std::mt19937 rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const PartitionedRealization part = fixtures::random_symmetric_partition(rng, 2 + trial % 3, 1 + trial % 3, 1 + trial % 2);
        EXPECT_TRUE(consistency_check(part, compute_dsf(part)));
    }
}

TEST(ConsistencyCheck, RealizeOutputIsConsistent) {
    const Dsf d = fixtures::example2_dsf();
    const GilbertData g = extract_modes(d);
    EXPECT_TRUE(consistency_check(realize(d, g, construct_rstar(g, {3})), d));
}

TEST(ConsistencyCheck, PerturbedHiddenDynamicsFail) {
    const Dsf d = fixtures::example2_dsf();
    const GilbertData g = extract_modes(d);
    PartitionedRealization part = realize(d, g, construct_rstar(g, {3}));
    part.A22(0, 0) += 0.1;
    EXPECT_FALSE(consistency_check(part, d));
}

TEST(ConsistencyCheck, ShapeMismatchThrows) {
    const PartitionedRealization part = fixtures::example1_partition();
    try {
        consistency_check(part, fixtures::example2_dsf());
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ShapeMismatch);
    }
}

TEST(DsfMake, RejectsInvalidInput) {
    RationalMatrix q(2, 2), p(2, 1);
    p.set(0, 0, lag(-1.0));
    p.set(1, 0, lag(-2.0));
    RationalMatrix diag = q;
    diag.set(0, 0, lag(-3.0));
    EXPECT_THROW(Dsf::make(diag, p), Error);
    RationalMatrix biproper = p;
    biproper.set(0, 0, rat_reduce(Polynomial{1.0, 1.0}, Polynomial{2.0, 1.0}));
    try {
        Dsf::make(q, biproper);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidDsf);
    }
    RationalMatrix repeated = p;
    repeated.set(1, 0, rat_reduce(Polynomial{1.0}, Polynomial{1.0, 2.0, 1.0}));
    try {
        Dsf::make(q, repeated);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::RepeatedPole);
    }
    RationalMatrix complex = p;
    complex.set(1, 0, rat_reduce(Polynomial{1.0}, Polynomial{2.0, 2.0, 1.0}));
    try {
        Dsf::make(q, complex);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ComplexPolesUnsupported);
    }
    EXPECT_THROW(Dsf::make(RationalMatrix(2, 3), p), Error);
}
