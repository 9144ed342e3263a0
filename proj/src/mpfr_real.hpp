#pragma once

// Minimal RAII wrapper over MPFR for the extended-precision code paths.
// Precision is explicit per value so concurrent callers never share state.

#include <mpfr.h>

#include <cmath>

namespace twinbeam::detail {

class MpReal {
public:
    explicit MpReal(mpfr_prec_t bits) { mpfr_init2(v_, bits); mpfr_set_zero(v_, 1); }
    MpReal(mpfr_prec_t bits, double x) { mpfr_init2(v_, bits); mpfr_set_d(v_, x, MPFR_RNDN); }
    MpReal(const MpReal& o) { mpfr_init2(v_, mpfr_get_prec(o.v_)); mpfr_set(v_, o.v_, MPFR_RNDN); }
    MpReal& operator=(const MpReal& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    ~MpReal() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    mpfr_prec_t bits() const { return mpfr_get_prec(v_); }

    int sign() const { return mpfr_sgn(v_); }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }

    /// Natural log of |value|; -inf for zero.
    double log_abs() const {
        if (is_zero()) return -INFINITY;
        MpReal a(bits());
        mpfr_abs(a.get(), v_, MPFR_RNDN);
        mpfr_log(a.get(), a.get(), MPFR_RNDN);
        return mpfr_get_d(a.get(), MPFR_RNDN);
    }

private:
    mpfr_t v_;
};

inline mpfr_prec_t bits_for_digits(int digits) {
    return static_cast<mpfr_prec_t>(std::ceil(digits * 3.3219280948873623)) + 8;
}

}  // namespace twinbeam::detail
