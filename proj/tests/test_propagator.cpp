#include <doctest.h>

#include <cmath>
#include <vector>

#include "pimc_ho/config.hpp"
#include "pimc_ho/propagator.hpp"

using namespace pimc_ho;

namespace {

// Independent contraction oracle: iterated pair reduction using the
// three-factor identity and, for potential-terminated triples, its inverse
// mapping b = mu + nu + mu*nu*kappa, a = mu*kappa/b, c = nu*kappa/b.
// Operates on the alternating (kinetic weight | potential shear) list at a
// fixed eps and reduces until a single V-K-V sandwich remains.
struct Op {
    bool kinetic;
    double weight;
};

std::vector<Op> to_ops(const StepSequence& seq, double eps) {
    std::vector<Op> ops;
    for (const Step& st : seq.steps) {
        double w = st.kind == StepKind::kinetic ? st.a * eps
                                                : st.b * eps + 2.0 * st.c * eps * eps * eps;
        if (!ops.empty() && ops.back().kinetic == (st.kind == StepKind::kinetic))
            ops.back().weight += w; // merge adjacent like factors
        else
            ops.push_back({st.kind == StepKind::kinetic, w});
    }
    return ops;
}

ScalarContraction reduce_ops(std::vector<Op> ops) {
    // merge adjacent like factors and drop identity (zero-weight) factors
    auto merge = [](std::vector<Op> v) {
        for (;;) {
            std::vector<Op> out;
            for (const Op& op : v) {
                if (op.weight == 0.0) continue;
                if (!out.empty() && out.back().kinetic == op.kinetic)
                    out.back().weight += op.weight;
                else
                    out.push_back(op);
            }
            if (out.size() == v.size()) return out;
            v = std::move(out);
        }
    };
    while (true) {
        ops = merge(ops);
        if (ops.size() <= 3) {
            bool vkv = ops.size() == 3 && !ops[0].kinetic && ops[1].kinetic && !ops[2].kinetic;
            if (vkv) {
                double kappa = ops[1].weight, mu = ops[2].weight, nu = ops[0].weight;
                REQUIRE(std::abs(nu - mu) < 1e-12);
                return {1.0 + kappa * mu, kappa, mu};
            }
        }
        // find a kinetic-potential-kinetic triple and contract it
        bool reduced = false;
        for (std::size_t i = 0; i + 2 < ops.size(); ++i) {
            if (ops[i].kinetic && !ops[i + 1].kinetic && ops[i + 2].kinetic) {
                auto pc = contract_pair(ops[i].weight, ops[i + 1].weight, ops[i + 2].weight);
                std::vector<Op> next(ops.begin(), ops.begin() + i);
                next.push_back({false, pc.nu});
                next.push_back({true, pc.kappa});
                next.push_back({false, pc.mu});
                next.insert(next.end(), ops.begin() + i + 3, ops.end());
                ops = next;
                reduced = true;
                break;
            }
        }
        if (reduced) continue;
        // no K-P-K left: invert a V-K-V sandwich into K-V-K to make progress
        for (std::size_t i = 0; i + 2 < ops.size(); ++i) {
            if (!ops[i].kinetic && ops[i + 1].kinetic && !ops[i + 2].kinetic) {
                double nu = ops[i].weight, kappa = ops[i + 1].weight, mu = ops[i + 2].weight;
                double b = mu + nu + mu * nu * kappa;
                if (b == 0.0) continue;
                double a = mu * kappa / b, c = nu * kappa / b;
                std::vector<Op> next(ops.begin(), ops.begin() + i);
                next.push_back({true, a});
                next.push_back({false, b});
                next.push_back({true, c});
                next.insert(next.end(), ops.begin() + i + 3, ops.end());
                ops = next;
                reduced = true;
                break;
            }
        }
        REQUIRE(reduced);
    }
}

ScalarContraction pair_reduction_oracle(const StepSequence& seq, double eps) {
    return reduce_ops(to_ops(seq, eps));
}

} // namespace

TEST_CASE("contract_pair: free-particle merge and direct substitution") {
    auto r1 = contract_pair(1.0, 0.0, 1.0);
    CHECK(r1.kappa == 2.0);
    CHECK(r1.nu == 0.0);
    CHECK(r1.mu == 0.0);

    // a = eps/2, b = eps, c = eps/2 at eps = 1
    auto r2 = contract_pair(0.5, 1.0, 0.5);
    CHECK(r2.kappa == doctest::Approx(1.25));
    CHECK(r2.nu == doctest::Approx(0.4));
    CHECK(r2.mu == doctest::Approx(0.4));
}

TEST_CASE("contract_pair: kinetic-terminated PA form gives kappa = eps + eps^3/4") {
    for (double eps : {0.1, 0.5, 1.0}) {
        auto r = contract_pair(0.5 * eps, eps, 0.5 * eps);
        CHECK(r.kappa == doctest::Approx(eps + eps * eps * eps / 4.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS((void)contract_pair(0.0, 1.0, 0.0), ContractionSingularity);
}

TEST_CASE("contract_pair: inverse mapping round-trips") {
    // b = mu + nu + mu*nu*kappa, a = mu*kappa/b, c = nu*kappa/b undoes the
    // three-factor contraction
    const double cases[][3] = {{0.4, 1.2, 0.4}, {0.05, 0.3, 0.7}, {1.0, 2.0, 0.25}};
    for (const auto& vkv : cases) {
        double nu = vkv[0], kappa = vkv[1], mu = vkv[2];
        double b = mu + nu + mu * nu * kappa;
        double a = mu * kappa / b, c = nu * kappa / b;
        auto r = contract_pair(a, b, c);
        CHECK(r.kappa == doctest::Approx(kappa).epsilon(1e-14));
        CHECK(r.nu == doctest::Approx(nu).epsilon(1e-14));
        CHECK(r.mu == doctest::Approx(mu).epsilon(1e-14));
    }
}

TEST_CASE("build_family: PA is the bare half-V sandwich") {
    StepSequence pa = build_family({Family::pa_ti, 0.0});
    REQUIRE(pa.steps.size() == 3);
    CHECK(pa.steps[0].kind == StepKind::potential);
    CHECK(pa.steps[0].b == 0.5);
    CHECK(pa.steps[0].c == 0.0);
    CHECK(pa.steps[1].kind == StepKind::kinetic);
    CHECK(pa.steps[1].a == 1.0);
    CHECK(pa.consistent());
    CHECK(pa.palindromic());
}

TEST_CASE("build_family: derived BDA and ACB coefficients") {
    FamilyParams bda;
    bda.family = Family::bda;
    bda.t1 = 0.3;
    bda.alpha = 0.5;
    StepSequence seq = build_family(bda);
    // v1 = 1/(12*0.3*0.7), v0 = 1/2 - v1
    CHECK(seq.steps[2].b == doctest::Approx(0.396825396825397).epsilon(1e-14));
    CHECK(seq.steps[0].b == doctest::Approx(0.103174603174603).epsilon(1e-14));
    CHECK(seq.consistent());
    CHECK(seq.palindromic());

    FamilyParams acb;
    acb.family = Family::acb;
    acb.t0 = 0.25;
    acb.a1 = 0.1;
    StepSequence aseq = build_family(acb);
    CHECK(aseq.steps[1].b == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(aseq.steps[3].b == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
    CHECK(aseq.consistent());
    CHECK(aseq.palindromic());
}

TEST_CASE("build_family: parameter range checks") {
    FamilyParams p;
    p.family = Family::bda;
    p.t1 = 0.1; // below (1 - 1/sqrt(3))/2
    CHECK_THROWS_AS((void)build_family(p), ParameterOutOfRange);
    p.t1 = 0.3;
    p.alpha = 1.5;
    CHECK_THROWS_AS((void)build_family(p), ParameterOutOfRange);
    FamilyParams q;
    q.family = Family::acb;
    q.t0 = 0.6;
    CHECK_THROWS_AS((void)build_family(q), ParameterOutOfRange);
    CHECK_THROWS_AS((void)build_family({Family::exact}), ParameterOutOfRange);
}

TEST_CASE("contract: PA-TI family closed forms") {
    const double alpha = 0.01;
    ContractedPropagator p = make_pa_ti(alpha);
    for (double eps : {0.2, 0.7, 1.3}) {
        CHECK(p.kappa1(eps) == doctest::Approx(eps).epsilon(1e-15));
        CHECK(p.mu1(eps) ==
              doctest::Approx(0.5 * eps + 2.0 * alpha * eps * eps * eps).epsilon(1e-14));
        CHECK(p.zeta1(eps) ==
              doctest::Approx(1.0 + 0.5 * eps * eps + 2.0 * alpha * std::pow(eps, 4)).epsilon(1e-14));
    }
}

TEST_CASE("contract: 4A zeta and kappa polynomials") {
    for (double alpha : {0.0, 0.2, 0.7, 1.0}) {
        ContractedPropagator p = make_4a(alpha);
        auto zeta = p.zeta_series(12);
        auto kappa = p.kappa_series(12);
        CHECK(zeta[0] == doctest::Approx(1.0));
        CHECK(zeta[2] == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(zeta[4] == doctest::Approx(1.0 / 24.0).epsilon(1e-13));
        CHECK(zeta[6] == doctest::Approx((1.0 + alpha) / 864.0).epsilon(1e-12));
        CHECK(std::abs(zeta[8] - alpha * (1.0 - alpha) / 10368.0) < 1e-16);
        for (int k = 9; k <= 12; ++k) CHECK(std::abs(zeta[k]) < 1e-18);
        for (int k = 1; k <= 12; k += 2) CHECK(zeta[k] == 0.0);

        CHECK(kappa[1] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(kappa[3] == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
        CHECK(kappa[5] == doctest::Approx((1.0 - alpha) / 144.0).epsilon(1e-12));
        for (int k = 7; k <= 12; ++k) CHECK(std::abs(kappa[k]) < 1e-18);
    }
}

TEST_CASE("contract: exact propagator is cosh/sinh") {
    ContractedPropagator p = make_exact();
    auto zeta = p.zeta_series(8);
    auto ref = series_cosh_ref<double>(8);
    for (int k = 0; k <= 8; ++k) CHECK(zeta[k] == doctest::Approx(ref[k]).epsilon(1e-15));
    CHECK(p.kappa1(0.9) == doctest::Approx(std::sinh(0.9)).epsilon(1e-15));
    CHECK(p.mu1(0.9) == doctest::Approx(std::tanh(0.45)).epsilon(1e-15));
}

TEST_CASE("contract: shear product has unit determinant and symmetric diagonal") {
    std::vector<StepSequence> seqs = {
        build_family({Family::pa_ti, 0.0}),
        build_family({Family::pa_ti, published::ti_alpha}),
    };
    FamilyParams p4;
    p4.family = Family::four_a;
    p4.alpha = 0.3;
    seqs.push_back(build_family(p4));
    FamilyParams pb;
    pb.family = Family::bda;
    pb.t1 = published::bd_prime_t1;
    pb.alpha = published::bd_prime_alpha;
    seqs.push_back(build_family(pb));
    FamilyParams pc;
    pc.family = Family::acb;
    pc.t0 = published::ca1_t0;
    pc.a1 = published::ca1_a1;
    seqs.push_back(build_family(pc));

    for (const StepSequence& seq : seqs) {
        for (double eps : {0.1, 0.5, 1.0, 2.0}) {
            auto m = contract_to_matrix(seq, eps);
            CHECK(std::abs(m.m00 * m.m11 - m.m01 * m.m10 - 1.0) <= 1e-14);
            CHECK(std::abs(m.m00 - m.m11) <= 1e-14 * std::max(1.0, std::abs(m.m00)));
        }
    }
}

TEST_CASE("contract: matrix product agrees with iterated pair reduction") {
    std::vector<StepSequence> seqs;
    seqs.push_back(build_family({Family::pa_ti, 0.0}));
    seqs.push_back(build_family({Family::pa_ti, published::ti_alpha}));
    FamilyParams p4;
    p4.family = Family::four_a;
    p4.alpha = 0.2;
    seqs.push_back(build_family(p4));
    FamilyParams pb;
    pb.family = Family::bda;
    pb.t1 = published::bd_star_t1;
    pb.alpha = published::bd_star_alpha;
    seqs.push_back(build_family(pb));
    FamilyParams pc;
    pc.family = Family::acb;
    pc.t0 = published::ca2_t0;
    pc.a1 = published::ca2_a1;
    seqs.push_back(build_family(pc));

    for (const StepSequence& seq : seqs) {
        for (double eps : {0.1, 0.5, 1.0}) {
            ScalarContraction m = contract(seq, eps);
            ScalarContraction o = pair_reduction_oracle(seq, eps);
            CHECK(m.kappa == doctest::Approx(o.kappa).epsilon(1e-13));
            CHECK(m.mu == doctest::Approx(o.mu).epsilon(1e-13));
            CHECK(m.zeta == doctest::Approx(o.zeta).epsilon(1e-13));
        }
    }
}

TEST_CASE("contract: series evaluation matches scalar contraction") {
    std::vector<ContractedPropagator> props = {make_pa(), make_ti(), make_4a(0.4),
                                               make_bd_prime(), make_ca1()};
    for (const ContractedPropagator& p : props) {
        REQUIRE(p.sequence().has_value());
        for (double eps : {0.05, 0.2, 0.5}) {
            ScalarContraction s = contract(*p.sequence(), eps);
            CHECK(p.zeta1(eps) == doctest::Approx(s.zeta).epsilon(1e-12));
            CHECK(p.kappa1(eps) == doctest::Approx(s.kappa).epsilon(1e-12));
            CHECK(p.mu1(eps) == doctest::Approx(s.mu).epsilon(1e-12));
        }
    }
}

TEST_CASE("contract: fourth-order families match cosh through eps^4") {
    std::vector<ContractedPropagator> props = {make_4a(0.0), make_4a(0.8),
                                               make_bda(0.3, 0.2), make_acb(0.15, 0.25)};
    for (const ContractedPropagator& p : props) {
        auto zeta = p.zeta_series(4);
        CHECK(zeta[2] == doctest::Approx(0.5).epsilon(1e-13));
        CHECK(zeta[4] == doctest::Approx(1.0 / 24.0).epsilon(1e-12));
    }
}

TEST_CASE("contract: non-palindromic sequences are rejected") {
    StepSequence seq;
    seq.steps = {Step::potential(1.0), Step::kinetic(1.0)};
    CHECK_THROWS_AS((void)contract(seq), NonPalindromicSequence);
    CHECK_THROWS_AS((void)contract(seq, 0.5), NonPalindromicSequence);
}

TEST_CASE("config: family form and steps form") {
    std::istringstream fam("[family]\nname = bda\nt1 = 0.27564\nalpha = 0.171438\n");
    ContractedPropagator a = parse_propagator_config(fam);
    ContractedPropagator b = make_bd_prime();
    for (double eps : {0.3, 1.1}) {
        CHECK(a.zeta1(eps) == doctest::Approx(b.zeta1(eps)).epsilon(1e-15));
        CHECK(a.kappa1(eps) == doctest::Approx(b.kappa1(eps)).epsilon(1e-15));
    }

    std::istringstream steps("# PA by hand\n[steps]\nV 0.5 0\nT 1\nV 0.5 0\n");
    ContractedPropagator c = parse_propagator_config(steps);
    CHECK(c.zeta1(1.0) == doctest::Approx(1.5).epsilon(1e-15));

    std::istringstream bad("[steps]\nV 0.5 0\nT one\n");
    CHECK_THROWS_WITH_AS((void)parse_propagator_config(bad),
                         doctest::Contains("line 3"), ConfigError);
    std::istringstream bad2("[steps]\nV 0.5 0\nT 1\n");
    CHECK_THROWS_AS((void)parse_propagator_config(bad2), ConfigError);
}
