#include "willis/types.hpp"

namespace willis {

void CellParams::validate(const std::string& prefix) const {
    auto bad = [&](const char* field, const std::string& msg) {
        throw ConfigError(prefix + "." + field, msg);
    };
    if (!(h > 0.0)) bad("h", "must be > 0");
    if (!(K > 0.0)) bad("K", "must be > 0");
    if (!(m > 0.0)) bad("m", "must be > 0");
    if (!(c > 0.0 && c < 1.0)) bad("c", "must satisfy 0 < c < 1");
    if (delta.imag() < 0.0) bad("delta", "Im(delta) must be >= 0 (passive cell)");
    if (second_pair) {
        if (!(second_pair->m_prime > 0.0)) bad("second_pair.m_prime", "must be > 0");
        if (!(second_pair->c_prime > 0.0)) bad("second_pair.c_prime", "must be > 0");
    }
}

Mat6c block_matrix(const EffectiveLaw& law) {
    Mat6c b = Mat6c::Zero();
    b.block<4, 4>(0, 0) = law.C;
    b.block<4, 2>(0, 4) = law.S;
    b.block<2, 4>(4, 0) = law.D;
    b.block<2, 2>(4, 4) = law.rho;
    return b;
}

}  // namespace willis
