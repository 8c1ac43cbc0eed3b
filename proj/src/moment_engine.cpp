#include "sjl/moment_engine.hpp"

#include "sjl/errors.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>

namespace sjl {

namespace {

void require_even_order(int d_max) {
    if (d_max < 2 || d_max % 2 != 0) {
        throw ArgumentError("moment order must be a positive even integer, got " + std::to_string(d_max));
    }
}

int round_up_even(int j) { return j % 2 == 0 ? j : j + 1; }

}  // namespace

TrinaryLaw::TrinaryLaw(Rational p) : p_(std::move(p)) {
    p_.canonicalize();
    validate(p_);
}

void TrinaryLaw::validate(const Rational& p) {
    if (sgn(p) <= 0 || p > Rational(1, 2)) {
        throw DomainError("trinary law requires 0 < p <= 1/2 (sigma^2 + (1 - sigma)^2 = 1 - p has no real "
                          "solution sigma otherwise), got p = " +
                          to_string(p));
    }
}

std::vector<Rational> TrinaryLaw::raw_moments(int max_order) const {
    std::vector<Rational> out(static_cast<std::size_t>(max_order) + 1, Rational(0));
    out[0] = 1;
    for (int j = 2; j <= max_order; j += 2) out[j] = p_;
    return out;
}

std::vector<Rational> trinary_moments(const Rational& p, int d_max) {
    require_even_order(d_max);
    return TrinaryLaw(p).raw_moments(d_max);
}

std::vector<Rational> raw_to_cumulants(const std::vector<Rational>& raw) {
    const int top = static_cast<int>(raw.size()) - 1;
    std::vector<Rational> kappa(raw.size(), Rational(0));
    for (int n = 1; n <= top; ++n) {
        Rational acc = raw[n];
        for (int k = 1; k < n; ++k) {
            if (sgn(kappa[k]) == 0 || sgn(raw[n - k]) == 0) continue;
            acc -= Rational(binomial(n - 1, k - 1)) * kappa[k] * raw[n - k];
        }
        kappa[n] = acc;
    }
    return kappa;
}

std::vector<Rational> cumulants_to_raw(const std::vector<Rational>& cumulants) {
    const int top = static_cast<int>(cumulants.size()) - 1;
    std::vector<Rational> raw(cumulants.size(), Rational(0));
    if (top >= 0) raw[0] = 1;
    for (int n = 1; n <= top; ++n) {
        Rational acc = 0;
        for (int k = 1; k <= n; ++k) {
            if (sgn(cumulants[k]) == 0 || sgn(raw[n - k]) == 0) continue;
            acc += Rational(binomial(n - 1, k - 1)) * cumulants[k] * raw[n - k];
        }
        raw[n] = acc;
    }
    return raw;
}

MomentTable sum_moments(const Rational& p, std::uint64_t count, int d_max) {
    require_even_order(d_max);
    if (count == 0) throw ArgumentError("number of summands must be positive");
    const TrinaryLaw law(p);
    auto kappa = raw_to_cumulants(law.raw_moments(d_max));
    const Rational scale(make_bigint(count));
    for (auto& k : kappa) k *= scale;
    return MomentTable{law.p(), count, cumulants_to_raw(kappa)};
}

std::vector<Rational> binom_diff_moments_exact(std::uint64_t n, const Rational& p, int max_order) {
    if (n < 2) throw DomainError("binomial difference needs n >= 2");
    if (max_order < 0) throw ArgumentError("negative moment order");
    const std::uint64_t count = n - 1;
    const int table_order = std::max(2, round_up_even(max_order));
    auto table = sum_moments(p, count, table_order);
    std::vector<Rational> out(static_cast<std::size_t>(max_order) + 1, Rational(0));
    const BigInt base = make_bigint(count);
    BigInt scale = 1;
    for (int j = 0; j <= max_order; j += 2) {
        out[j] = table.raw[j] / Rational(scale);
        scale *= base;
    }
    return out;
}

namespace {

struct CacheKey {
    std::string p;
    std::uint64_t count;
    bool operator<(const CacheKey& o) const { return std::tie(count, p) < std::tie(o.count, o.p); }
};

class MomentCache {
public:
    std::vector<double> get(std::uint64_t n, const Rational& p, int max_order) {
        Rational canon = p;
        canon.canonicalize();
        TrinaryLaw::validate(canon);
        CacheKey key{to_string(canon), n - 1};
        {
            std::lock_guard lock(mutex_);
            auto it = entries_.find(key);
            if (it != entries_.end() && static_cast<int>(it->second.size()) > max_order) {
                return {it->second.begin(), it->second.begin() + max_order + 1};
            }
        }
        const int order = std::max(2, round_up_even(max_order));
        const auto exact = binom_diff_moments_exact(n, canon, order);
        std::vector<double> rounded;
        rounded.reserve(exact.size());
        for (const auto& q : exact) rounded.push_back(to_double(q));
        {
            std::lock_guard lock(mutex_);
            if (entries_.size() >= kCapacity) entries_.clear();
            auto& slot = entries_[key];
            if (slot.size() < rounded.size()) slot = rounded;
        }
        rounded.resize(static_cast<std::size_t>(max_order) + 1);
        return rounded;
    }

    void clear() {
        std::lock_guard lock(mutex_);
        entries_.clear();
    }

    std::size_t size() {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    static constexpr std::size_t kCapacity = 4096;
    std::mutex mutex_;
    std::map<CacheKey, std::vector<double>> entries_;
};

MomentCache& cache() {
    static MomentCache instance;
    return instance;
}

}  // namespace

std::vector<double> binom_diff_moment_table(std::uint64_t n, const Rational& p, int max_order) {
    if (n < 2) throw DomainError("binomial difference needs n >= 2");
    if (max_order < 0) throw ArgumentError("negative moment order");
    return cache().get(n, p, max_order);
}

double binom_diff_moment(std::uint64_t n, const Rational& p, int j) {
    return binom_diff_moment_table(n, p, j)[static_cast<std::size_t>(j)];
}

void clear_moment_cache() { cache().clear(); }

std::size_t moment_cache_size() { return cache().size(); }

}  // namespace sjl
