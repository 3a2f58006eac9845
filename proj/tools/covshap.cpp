#include <iostream>

int main() {
    std::cout << "covshap: not yet wired\n";
    return 0;
}
