#include <cstdio>

int main() {
    std::puts("lsmu cli placeholder");
    return 0;
}
