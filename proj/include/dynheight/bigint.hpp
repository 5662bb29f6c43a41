// Arbitrary-precision integer/rational layer (GMP-backed) plus the few
// numeric helpers the height machinery needs: exact logs of big integers,
// p-adic valuations, and small-prime factorization of gcd contents.
#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace dynheight {

using Int = mpz_class;
using Rat = mpq_class;

struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// log |n| for a big integer, accurate to full double precision.
// mpz_get_d_2exp returns m in [0.5,1) and e with |n| = m * 2^e.
inline double log_abs(const Int& n) {
    if (n == 0) throw DomainError("log_abs: zero");
    signed long e = 0;
    double m = mpz_get_d_2exp(&e, n.get_mpz_t());
    return std::log(std::fabs(m)) + static_cast<double>(e) * M_LN2;
}

inline size_t bit_size(const Int& n) { return mpz_sizeinbase(n.get_mpz_t(), 2); }

// ord_p(n) for n != 0.
inline unsigned long p_adic_valuation(const Int& n, const Int& p) {
    if (n == 0) throw DomainError("p_adic_valuation: zero argument");
    mpz_class tmp;
    return mpz_remove(tmp.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
}

inline bool is_probable_prime(const Int& n) {
    return mpz_probab_prime_p(n.get_mpz_t(), 32) != 0;
}

// Factor |n| into primes. Trial division plus Pollard rho; contents met in
// practice are smooth or small, but rho covers stray large factors too.
inline void factor_into(const Int& n_in, std::vector<Int>& primes) {
    Int n = abs(n_in);
    if (n <= 1) return;
    for (long p : {2L, 3L, 5L, 7L, 11L, 13L, 17L, 19L, 23L, 29L, 31L, 37L}) {
        while (mpz_divisible_ui_p(n.get_mpz_t(), p)) {
            primes.emplace_back(p);
            n /= static_cast<unsigned long>(p);
        }
    }
    if (n == 1) return;
    Int d(41);
    while (d * d <= n && d < 100000) {
        while (mpz_divisible_p(n.get_mpz_t(), d.get_mpz_t())) {
            primes.push_back(d);
            n /= d;
        }
        d += 2;
    }
    if (n == 1) return;
    if (is_probable_prime(n)) {
        primes.push_back(n);
        return;
    }
    // Pollard rho (Brent variant) on the remaining hard part.
    auto rho = [](const Int& m) -> Int {
        Int x(2), y(2), c(1), g(1);
        for (int attempt = 0; attempt < 64; ++attempt) {
            x = 2;
            y = 2;
            c = attempt + 1;
            g = 1;
            while (g == 1) {
                x = (x * x + c) % m;
                y = (y * y + c) % m;
                y = (y * y + c) % m;
                g = gcd(abs(x - y), m);
            }
            if (g != m) return g;
        }
        throw DomainError("factor_into: pollard rho failed");
    };
    std::vector<Int> stack{n};
    while (!stack.empty()) {
        Int m = stack.back();
        stack.pop_back();
        if (m == 1) continue;
        if (is_probable_prime(m)) {
            primes.push_back(m);
            continue;
        }
        Int g = rho(m);
        stack.push_back(g);
        stack.push_back(m / g);
    }
}

inline std::vector<Int> factor(const Int& n) {
    std::vector<Int> primes;
    factor_into(n, primes);
    return primes;
}

// Parse "p/q" or "p" (also accepts plain decimal integers of any size).
inline Rat parse_rational(const std::string& s) {
    Rat r;
    if (r.set_str(s, 10) != 0) throw DomainError("bad rational literal: " + s);
    r.canonicalize();
    return r;
}

inline double to_double(const Rat& r) { return r.get_d(); }

}  // namespace dynheight
