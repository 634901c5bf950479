#include "plsr/io.hpp"
int main() { return 0; }
