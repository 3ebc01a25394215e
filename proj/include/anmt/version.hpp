#ifndef ANMT_VERSION_HPP
#define ANMT_VERSION_HPP

namespace anmt {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace anmt

#endif
