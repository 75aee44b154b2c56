// Placeholder CLI; subcommands land once the harness module is in place.
int main() { return 0; }
