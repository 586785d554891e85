#include "panda/error.hpp"

namespace panda {

int exit_code_for(const Error& e) noexcept {
    return dynamic_cast<const IoError*>(&e) != nullptr ? 2 : 1;
}

}  // namespace panda
