// Free functions with plain parameter and local declarations.
#include <cstddef>
#include <string>

int add(int a, int b) {
    return a + b;
}

static double scale(double factor, double input) {
    double scaled = factor * input;
    return scaled;
}

inline long triple(long n) { return 3 * n; }

void swap_ints(int* left, int* right) {
    int keep = *left;
    *left = *right;
    *right = keep;
}

std::string repeat(const std::string& chunk, std::size_t times) {
    std::string out;
    for (std::size_t rep = 0; rep < times; ++rep) {
        out += chunk;
    }
    return out;
}

unsigned popcount_bytes(const unsigned char* data, unsigned len) {
    unsigned bits = 0;
    for (unsigned pos = 0; pos < len; ++pos) {
        unsigned char cur = data[pos];
        while (cur) {
            bits += cur & 1u;
            cur >>= 1;
        }
    }
    return bits;
}
