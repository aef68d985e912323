#ifndef ROTQ_CSVFMT_HPP
#define ROTQ_CSVFMT_HPP

#include <cstdio>
#include <string>

namespace rotq {

// 12 significant digits, '.' decimal separator regardless of locale.
inline std::string fmt_sig12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
}

}  // namespace rotq

#endif
