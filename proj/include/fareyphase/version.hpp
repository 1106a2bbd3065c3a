#ifndef FAREYPHASE_VERSION_HPP
#define FAREYPHASE_VERSION_HPP

namespace fareyphase {
inline constexpr const char* version = "1.0.0";
}

#endif
