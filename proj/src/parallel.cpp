#include "bethestrip/parallel.hpp"

#include <cstdlib>
#include <string>

namespace bethe {

int default_workers() {
    if (const char* env = std::getenv("BETHE_STRIP_THREADS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return 1;
}

}  // namespace bethe
