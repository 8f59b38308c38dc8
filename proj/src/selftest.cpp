namespace pretzel {
}
