// Unterminated block comment before any function.
/* this comment never closes
int broken(int x) {
    return x;
}
