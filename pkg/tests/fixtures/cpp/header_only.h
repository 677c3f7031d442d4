// Header with inline definitions and declarations without bodies.
#ifndef FIXTURES_HEADER_ONLY_H_
#define FIXTURES_HEADER_ONLY_H_

int declared_not_defined(int x);
void another_declaration(double y, char z);

inline int header_square(int side) {
    int area = side * side;
    return area;
}

inline bool header_flag(bool raw) { return !raw; }

template <typename T>
inline T header_identity(T passthrough) {
    return passthrough;
}

#endif  // FIXTURES_HEADER_ONLY_H_
