#pragma once

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

namespace degenlab::verify {

/// FNV-1a digest over a canonical byte rendering of the inputs; enough to
/// re-identify a report's exact configuration.
class DigestBuilder {
public:
    DigestBuilder& add(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%a;", v);
        return add_bytes(buf);
    }
    DigestBuilder& add(std::uint64_t v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%" PRIu64 ";", v);
        return add_bytes(buf);
    }
    DigestBuilder& add(int v) { return add(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
    DigestBuilder& add(const std::string& s) { return add_bytes((s + ";").c_str()); }

    std::string hex() const {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%016" PRIx64, state_);
        return buf;
    }

private:
    DigestBuilder& add_bytes(const char* s) {
        for (const char* p = s; *p; ++p) {
            state_ ^= static_cast<std::uint8_t>(*p);
            state_ *= 0x100000001b3ull;
        }
        return *this;
    }
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

enum class CheckKind { equality, bound };

/// Result of one verified identity or one-sided bound. For equalities,
/// abs_err is |lhs - rhs|; for bounds it is the violation max(0, lhs - rhs)
/// and `slack` records rhs - lhs.
struct IdentityReport {
    std::string identity_tag;
    CheckKind kind = CheckKind::equality;
    double lhs = 0.0;
    double rhs = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    double slack = 0.0;
    std::string method; // "quadrature" or "mc"
    std::size_t budget = 0;
    double tolerance = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    std::string inputs_digest;
    int n = 0;       // truncation dimension
    int degree = -1; // test-function degree when meaningful

    void finalize() {
        if (kind == CheckKind::equality) {
            abs_err = std::abs(lhs - rhs);
            slack = 0.0;
        } else {
            slack = rhs - lhs;
            abs_err = std::max(0.0, lhs - rhs);
        }
        const double scale = std::max(std::abs(lhs), std::abs(rhs));
        rel_err = scale > 0.0 ? abs_err / scale : 0.0;
        pass = abs_err <= tolerance || rel_err <= tolerance;
    }
};

inline nlohmann::json to_json(const IdentityReport& r) {
    return nlohmann::json{{"identity_tag", r.identity_tag},
                          {"kind", r.kind == CheckKind::equality ? "equality" : "bound"},
                          {"lhs", r.lhs},
                          {"rhs", r.rhs},
                          {"abs_err", r.abs_err},
                          {"rel_err", r.rel_err},
                          {"slack", r.slack},
                          {"method", r.method},
                          {"budget", r.budget},
                          {"tolerance", r.tolerance},
                          {"pass", r.pass},
                          {"seed", r.seed},
                          {"inputs_digest", r.inputs_digest},
                          {"n", r.n},
                          {"degree", r.degree}};
}

inline IdentityReport report_from_json(const nlohmann::json& j) {
    IdentityReport r;
    r.identity_tag = j.at("identity_tag").get<std::string>();
    r.kind = j.at("kind").get<std::string>() == "bound" ? CheckKind::bound : CheckKind::equality;
    r.lhs = j.at("lhs").get<double>();
    r.rhs = j.at("rhs").get<double>();
    r.abs_err = j.at("abs_err").get<double>();
    r.rel_err = j.at("rel_err").get<double>();
    r.slack = j.value("slack", 0.0);
    r.method = j.at("method").get<std::string>();
    r.budget = j.at("budget").get<std::size_t>();
    r.tolerance = j.at("tolerance").get<double>();
    r.pass = j.at("pass").get<bool>();
    r.seed = j.value("seed", std::uint64_t{0});
    r.inputs_digest = j.value("inputs_digest", std::string{});
    r.n = j.value("n", 0);
    r.degree = j.value("degree", -1);
    return r;
}

} // namespace degenlab::verify
